"""Wave-mixing process models: interaction Hamiltonians and closed forms.

Three processes are modelled, each in the interaction picture (free-field
terms dropped, hbar = 1):

* ``fwm``  four-wave mixing, ``g (A+^2 B C + A^2 B+ C+)``
* ``swm``  six-wave mixing, ``g (A+^2 B^3 C + A^2 B+^3 C+)``
* ``shg``  second-harmonic generation, ``g (a2+ a1^2 + a1+^2 a2)``

The closed forms are the short-time (second order in ``g t``) expressions
for the pump mode, evaluated verbatim, including where they
disagree with the exact dynamics.  Compare them with
:func:`phasefluct.pipeline.exact_point` rather than trusting them blindly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import RoleMismatch
from .fock import (
    ModeOperator,
    ModeSpace,
    PumpAmplitude,
    build_space,
    default_pump_cutoff,
    ladder,
    number_op,
)
from .markers import UNDEF

PROCESSES = ("fwm", "swm", "shg")

PROCESS_ROLES = {
    "fwm": ("pump", "stokes", "signal"),
    "swm": ("pump", "stokes", "signal"),
    "shg": ("pump", "harmonic"),
}

# swm stokes/signal climb by 3 and 1 per event, with strong Bose enhancement
AUX_CUTOFFS = {"fwm": (7, 7), "swm": (39, 13), "shg": (7,)}

# coefficient of g^2 t^2 |alpha|^2 in the numerator of each U formula
SMALLNESS_COEFF = {"fwm": 12.0, "swm": 72.0, "shg": 4.0}
VALIDITY_THRESHOLD = 0.1

Q_SINGULAR_TOL = 1e-14


class ValidityWarning(UserWarning):
    """Short-time formulas evaluated outside their small-``g t`` regime."""


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    g: float
    pump: PumpAmplitude
    t: float
    frequencies: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in PROCESSES:
            raise ValueError(f"unknown process {self.kind!r}; expected one of {PROCESSES}")
        if self.g < 0:
            raise ValueError("coupling g must be non-negative")
        if self.t < 0:
            raise ValueError("interaction time t must be non-negative")

    @classmethod
    def create(cls, kind: str, alpha_sq: float, theta: float, g: float, t: float):
        return cls(kind, g, PumpAmplitude.from_alpha_sq(alpha_sq, theta), t)

    @property
    def alpha_sq(self) -> float:
        return self.pump.mean_photons

    @property
    def theta(self) -> float:
        return self.pump.phase

    @property
    def gt(self) -> float:
        return self.g * self.t

    @property
    def smallness(self) -> float:
        return SMALLNESS_COEFF[self.kind] * self.gt**2 * self.alpha_sq

    @property
    def beyond_validity(self) -> bool:
        """True when the short-time formulas should not be trusted."""
        return self.smallness > VALIDITY_THRESHOLD


def default_cutoffs(kind: str, alpha_sq: float) -> tuple:
    return (default_pump_cutoff(alpha_sq),) + AUX_CUTOFFS[kind]


def process_space(spec_or_kind, alpha_sq: Optional[float] = None,
                  cutoffs: Optional[Sequence[int]] = None) -> ModeSpace:
    """Mode space for a process, with default cutoffs unless overridden."""
    if isinstance(spec_or_kind, ProcessSpec):
        kind, alpha_sq = spec_or_kind.kind, spec_or_kind.alpha_sq
    else:
        kind = spec_or_kind
    if cutoffs is None:
        cutoffs = default_cutoffs(kind, alpha_sq or 0.0)
    return build_space(PROCESS_ROLES[kind], cutoffs)


def _modes(kind: str, space: ModeSpace):
    expected = PROCESS_ROLES[kind]
    if sorted(space.mode_roles) != sorted(expected):
        raise RoleMismatch(
            f"{kind} needs modes {expected}, space has {space.mode_roles}"
        )
    return [ladder(space, space.mode_index(r)) for r in expected]


def interaction_hamiltonian(spec: ProcessSpec, space: ModeSpace) -> ModeOperator:
    """Interaction-picture coupling term as a hermitian operator."""
    ops = _modes(spec.kind, space)
    if spec.kind == "shg":
        a1, a2 = ops
        down = a2.dag() @ a1 @ a1
    else:
        A, B, C = ops
        b_power = 1 if spec.kind == "fwm" else 3
        Bd_n = B.dag()
        for _ in range(b_power - 1):
            Bd_n = Bd_n @ B.dag()
        down = A @ A @ Bd_n @ C.dag()
    h = (down + down.dag()) * spec.g
    return h.as_hermitian()


def conserved_quantities(kind: str, space: ModeSpace) -> dict:
    """Number combinations left invariant by the process Hamiltonian."""
    _modes(kind, space)
    n = {r: number_op(space, space.mode_index(r)) for r in PROCESS_ROLES[kind]}
    if kind == "fwm":
        return {
            "N_A+2N_B": n["pump"] + n["stokes"] * 2,
            "N_A+2N_C": n["pump"] + n["signal"] * 2,
        }
    if kind == "swm":
        return {
            "3N_A+2N_B": n["pump"] * 3 + n["stokes"] * 2,
            "N_A+2N_C": n["pump"] + n["signal"] * 2,
        }
    return {"N_1+2N_2": n["pump"] + n["harmonic"] * 2}


def heisenberg_reference_operator(spec: ProcessSpec, space: ModeSpace) -> ModeOperator:
    """Closed-form second-order Heisenberg solution for the pump annihilator.

    Built term by term from ladder matrices so it can be compared against
    the automated nested-commutator expansion.
    """
    ops = _modes(spec.kind, space)
    g, t = spec.g, spec.t
    first = -2j * g * t
    second = g * g * t * t
    if spec.kind == "shg":
        a1, a2 = ops
        a1d, a2d = a1.dag(), a2.dag()
        return (
            a1
            + a1d @ a2 * first
            + (a2d @ a2 @ a1 - a1d @ a1 @ a1 * 0.5) * (2 * second)
        )
    A, B, C = ops
    Ad, Bd, Cd = A.dag(), B.dag(), C.dag()
    nB, nC = Bd @ B, Cd @ C
    depl = Ad @ A @ A
    if spec.kind == "fwm":
        bracket = (
            A @ nB @ nC * 4
            - depl @ nB * 2
            - depl @ nC * 2
            - depl * 2
        )
        return A + Ad @ B @ C * first + bracket * (second / 2)
    B2, B3 = B @ B, B @ B @ B
    Bd2, Bd3 = Bd @ Bd, Bd @ Bd @ Bd
    bracket = (
        A @ Bd3 @ B3 @ nC * 2
        - depl @ Bd2 @ B2 @ nC * 9
        - depl @ nB @ nC * 18
        - depl @ Bd3 @ B3
        - depl @ Bd2 @ B2 * 9
        - depl @ nB * 18
        - depl @ nC * 6
        - depl * 6
    )
    return A + Ad @ B3 @ C * first + bracket * second


@dataclass(frozen=True)
class ClosedFormResult:
    """Second-order formula values for one :class:`ProcessSpec`.

    ``Q`` is :data:`~phasefluct.markers.UNDEF` where its denominator
    vanishes.  The phase-operator intermediates are only available for
    four-wave mixing and are ``None`` otherwise.  ``provenance`` maps each
    field to the formula that produced it.
    """

    spec: ProcessSpec
    N_bar: float
    var_N: float
    d: float
    U: float
    S_param: float
    Q: object
    mean_C_sq: Optional[float] = None
    mean_S_sq: Optional[float] = None
    mean_C2: Optional[float] = None
    mean_S2: Optional[float] = None
    var_C: Optional[float] = None
    var_S: Optional[float] = None
    provenance: dict = field(default_factory=dict)


# per process: (depletion k_N, antibunching k_d, U numerator coeff, S/Q rate,
# S/Q offset inside the cos 2theta bracket)
_COEFFS = {
    "fwm": dict(k_n=2.0, k_d=6.0, k_u=12.0, rate=2.0, shift=6.0),
    "swm": dict(k_n=12.0, k_d=12.0, k_u=72.0, rate=12.0, shift=6.0),
    "shg": dict(k_n=2.0, k_d=2.0, k_u=4.0, rate=2.0, shift=2.0),
}


def closed_form(spec: ProcessSpec, warn: bool = True) -> ClosedFormResult:
    """Evaluate the closed-form short-time expressions for ``spec``."""
    if warn and spec.beyond_validity:
        warnings.warn(
            f"{spec.kind}: smallness parameter {spec.smallness:.3g} exceeds "
            f"{VALIDITY_THRESHOLD}; second-order formulas are unreliable",
            ValidityWarning,
            stacklevel=2,
        )
    c = _COEFFS[spec.kind]
    a2 = spec.alpha_sq
    e2 = spec.gt**2
    x = e2 * a2
    c2 = math.cos(2 * spec.theta)

    n_bar = a2 - c["k_n"] * e2 * a2**2
    d = -c["k_d"] * e2 * a2**2
    if spec.kind == "fwm":
        var_n = a2 - 8 * e2 * a2**2
        var_n_src = "|a|^2 - 8 g^2 t^2 |a|^4"
    else:
        var_n = n_bar + d
        var_n_src = "N_bar + d"
    u = 0.5 * (1 - c["k_u"] * x) / (1 - c["k_n"] * x)
    s_param = 0.25 / (n_bar + 0.5) * (a2 + c["rate"] * a2**2 * e2 * (c2 - c["shift"]))
    if a2 == 0 or abs(1 + c2) < Q_SINGULAR_TOL:
        q = UNDEF
    else:
        q = (1 + c["rate"] * x * (c2 - c["shift"])) / (
            2 * (c2 + 1) * (1 - c["rate"] * x)
        )

    k, r, sh = c["k_n"], c["rate"], c["shift"]
    provenance = {
        "N_bar": f"|a|^2 - {k:g} g^2 t^2 |a|^4",
        "var_N": var_n_src,
        "d": f"-{c['k_d']:g} g^2 t^2 |a|^4",
        "U": f"(1 - {c['k_u']:g} g^2t^2|a|^2) / (2 (1 - {k:g} g^2t^2|a|^2))",
        "S_param": f"(|a|^2 + {r:g}|a|^4 g^2t^2 (cos2th - {sh:g})) / (4 (N_bar + 1/2))",
        "Q": f"(1 + {r:g}|a|^2 g^2t^2 (cos2th - {sh:g})) / "
             f"(2 (cos2th + 1)(1 - {r:g}|a|^2 g^2t^2))",
    }
    extra = {}
    if spec.kind == "fwm":
        kk = 0.25 / (n_bar + 0.5)
        re2 = 2 * a2 * c2  # alpha^2 + alpha*^2
        extra = dict(
            mean_C_sq=kk * (re2 + 2 * a2 - e2 * (2 * a2 * re2 + 4 * a2**2)),
            mean_S_sq=-kk * (re2 - 2 * a2 - e2 * (2 * a2 * re2 - 4 * a2**2)),
            mean_C2=kk * (re2 + 2 * a2 + 1
                          - e2 * (re2 + 2 * a2 * re2 + 4 * a2**2 + 4 * a2)),
            mean_S2=-kk * (re2 - 2 * a2 - 1
                           - e2 * (re2 + 2 * a2 * re2 - 4 * a2**2 - 4 * a2)),
            var_C=kk * (1 - e2 * (re2 + 4 * a2)),
            var_S=-kk * (-1 - e2 * (re2 - 4 * a2)),
        )
        provenance.update({
            "mean_C_sq": "BP <C>^2, second order",
            "mean_S_sq": "BP <S>^2, second order",
            "mean_C2": "BP <C^2>, second order",
            "mean_S2": "BP <S^2>, second order",
            "var_C": "(1 - g^2t^2 (2|a|^2 cos2th + 4|a|^2)) / (4 (N_bar + 1/2))",
            "var_S": "(1 + g^2t^2 (2|a|^2 cos2th - 4|a|^2)) / (4 (N_bar + 1/2))",
        })
    return ClosedFormResult(
        spec=spec, N_bar=n_bar, var_N=var_n, d=d, U=u, S_param=s_param, Q=q,
        provenance=provenance, **extra,
    )


def pump_lowering(space: ModeSpace) -> ModeOperator:
    return ladder(space, space.pump_mode)

