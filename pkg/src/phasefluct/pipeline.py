"""Exact pipeline: coherent pump -> exact evolution -> phase moments -> CN parameters."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .analysis import CNResult, cn_parameters
from .evolution import EvolutionSettings, boundary_width, evolve
from .fock import ModeSpace, StateVector, coherent_pump_state, leakage
from .phase import MomentSet, PhaseOperatorSet, moments, operators_for
from .processes import ProcessSpec, interaction_hamiltonian, process_space


@dataclass(frozen=True, eq=False)
class ExactPoint:
    spec: ProcessSpec
    space: ModeSpace
    state: StateVector
    operators: PhaseOperatorSet
    moments: MomentSet
    cn: CNResult
    leakage: float


def evolved_state(
    spec: ProcessSpec,
    cutoffs: Optional[Sequence[int]] = None,
    settings: Optional[EvolutionSettings] = None,
) -> StateVector:
    settings = settings or EvolutionSettings()
    space = process_space(spec, cutoffs=cutoffs)
    psi0 = coherent_pump_state(space, spec.pump, settings.leakage_threshold)
    H = interaction_hamiltonian(spec, space)
    return evolve(psi0, H, spec.t, settings)


def exact_point(
    spec: ProcessSpec,
    formalism: str = "bp",
    cutoffs: Optional[Sequence[int]] = None,
    settings: Optional[EvolutionSettings] = None,
) -> ExactPoint:
    """Evaluate the fluctuation parameters of ``spec`` by exact evolution.

    For ``formalism="bp"`` the rescaling photon number is the evolved
    state's own ``<N>``.
    """
    state = evolved_state(spec, cutoffs, settings)
    ops = operators_for(state, formalism)
    m = moments(state, ops)
    cn = cn_parameters(m, ops.formalism, provenance="exact", spec=spec)
    H = interaction_hamiltonian(spec, state.space)
    return ExactPoint(
        spec=spec,
        space=state.space,
        state=state,
        operators=ops,
        moments=m,
        cn=cn,
        leakage=leakage(state, boundary_width(H)),
    )
