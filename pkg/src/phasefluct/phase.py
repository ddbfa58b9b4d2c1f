"""Pump-mode sine/cosine phase operators and the moments built from them.

Two formalisms are supported:

``SG``
    Susskind-Glogower operators, ``C = [(N+1)^-1/2 a + a+ (N+1)^-1/2] / 2``
    and the matching sine.  They satisfy ``<C^2> + <S^2> = 1 - <P0>/2``.
``BP``
    Barnett-Pegg style operators obtained by rescaling the annihilator
    with the scalar ``(N_bar + 1/2)^-1/2``, where ``N_bar`` is the mean
    photon number after the interaction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ImaginaryResidueExceeded, NegativeMeanPhoton, SpaceMismatch
from .fock import (
    ModeOperator,
    ModeSpace,
    StateVector,
    diagonal_op,
    expectation,
    ladder,
    number_op,
    variance,
)

IMAG_TOL = 1e-10


@dataclass(frozen=True)
class PhaseFormalism:
    tag: str
    n_bar: Optional[float] = None

    def __post_init__(self):
        if self.tag not in ("SG", "BP"):
            raise ValueError(f"formalism must be 'SG' or 'BP', got {self.tag!r}")
        if self.tag == "BP":
            if self.n_bar is None:
                raise ValueError("BP formalism needs the mean photon number")
            if self.n_bar < 0:
                raise NegativeMeanPhoton(f"mean photon number {self.n_bar} < 0")

    @classmethod
    def sg(cls) -> "PhaseFormalism":
        return cls("SG")

    @classmethod
    def bp(cls, n_bar: float) -> "PhaseFormalism":
        return cls("BP", float(n_bar))


@dataclass(frozen=True, eq=False)
class PhaseOperatorSet:
    formalism: PhaseFormalism
    pump_mode: int
    C: ModeOperator
    S: ModeOperator
    P0: ModeOperator
    E: Optional[ModeOperator] = None

    @property
    def space(self) -> ModeSpace:
        return self.C.space


def vacuum_projector(space: ModeSpace, pump_mode: int) -> ModeOperator:
    values = np.zeros(space.dims[pump_mode])
    values[0] = 1.0
    return diagonal_op(space, pump_mode, values)


def sg_operators(space: ModeSpace, pump_mode: Optional[int] = None) -> PhaseOperatorSet:
    if pump_mode is None:
        pump_mode = space.pump_mode
    pump_mode = space.check_mode(pump_mode)
    a = ladder(space, pump_mode)
    inv_sqrt = diagonal_op(
        space, pump_mode, 1.0 / np.sqrt(np.arange(1, space.dims[pump_mode] + 1))
    )
    e = inv_sqrt @ a  # (N+1)^-1/2 a
    C = ((e + e.dag()) * 0.5).as_hermitian()
    S = ((e - e.dag()) * (-0.5j)).as_hermitian()
    return PhaseOperatorSet(
        PhaseFormalism.sg(), pump_mode, C, S, vacuum_projector(space, pump_mode)
    )


def bp_operators(
    space: ModeSpace, pump_mode: Optional[int] = None, n_bar: float = 0.0
) -> PhaseOperatorSet:
    formalism = PhaseFormalism.bp(n_bar)
    if pump_mode is None:
        pump_mode = space.pump_mode
    pump_mode = space.check_mode(pump_mode)
    E = ladder(space, pump_mode) * (formalism.n_bar + 0.5) ** -0.5
    C = ((E + E.dag()) * 0.5).as_hermitian()
    S = ((E - E.dag()) * (-0.5j)).as_hermitian()
    return PhaseOperatorSet(formalism, pump_mode, C, S, vacuum_projector(space, pump_mode), E)


def operators_for(state: StateVector, tag: str) -> PhaseOperatorSet:
    """Phase operators for ``state``; BP uses the state's own mean photon number."""
    tag = tag.upper()
    pump = state.space.pump_mode
    if tag == "SG":
        return sg_operators(state.space, pump)
    n_bar = expectation(state, number_op(state.space, pump)).real
    return bp_operators(state.space, pump, max(n_bar, 0.0))


@dataclass(frozen=True)
class MomentSet:
    mean_N: float
    mean_N2: float
    var_N: float
    mean_C: float
    mean_S: float
    mean_C2: float
    mean_S2: float
    var_C: float
    var_S: float
    mean_P0: float


def _real(value: complex, name: str) -> float:
    if abs(value.imag) > IMAG_TOL:
        raise ImaginaryResidueExceeded(f"<{name}> has imaginary part {value.imag:.3e}")
    return value.real


def moments(state: StateVector, ops: PhaseOperatorSet) -> MomentSet:
    if state.space != ops.space:
        raise SpaceMismatch("state and phase operators live on different mode spaces")
    psi = state.amplitudes
    n_op = number_op(state.space, ops.pump_mode)

    def mean_and_square(op: ModeOperator, name: str):
        v = op.matrix @ psi
        mean = _real(complex(np.vdot(psi, v)), name)
        return mean, float(np.vdot(v, v).real)

    mean_n, mean_n2 = mean_and_square(n_op, "N")
    mean_c, mean_c2 = mean_and_square(ops.C, "C")
    mean_s, mean_s2 = mean_and_square(ops.S, "S")
    p0 = _real(expectation(state, ops.P0), "P0")
    return MomentSet(
        mean_N=mean_n,
        mean_N2=mean_n2,
        var_N=variance(state, n_op),
        mean_C=mean_c,
        mean_S=mean_s,
        mean_C2=mean_c2,
        mean_S2=mean_s2,
        var_C=variance(state, ops.C),
        var_S=variance(state, ops.S),
        mean_P0=min(max(p0, 0.0), 1.0),
    )
