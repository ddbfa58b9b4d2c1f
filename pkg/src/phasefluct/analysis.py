"""Carruthers-Nieto fluctuation parameters, formula comparison and slope fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import ErrorBelowFloor, InsufficientPoints, SpecMismatch
from .markers import UNDEF
from .phase import MomentSet, PhaseFormalism
from .processes import ClosedFormResult, ProcessSpec

DENOM_FLOOR = 1e-14
U_LOWER_BOUND = 0.25
BOUND_TOL = 1e-10
RELATIVE_SWITCH = 1e-12
ERROR_FLOOR = 1e-13

COMPARED_FIELDS = ("U", "S_param", "Q", "N_bar", "var_N", "d")


@dataclass(frozen=True)
class CNResult:
    """Fluctuation parameters of one state.

    ``U``, ``Q`` and ``b_ratio`` may be :data:`UNDEF`.  ``product_bound`` is
    the lower bound on ``var_C * var_S`` implied by the commutator of the
    phase operators; for BP ``product_bound_alt`` holds the weaker-exponent
    variant ``1 / (16 (N_bar + 1/2))`` that is sometimes quoted instead.
    """

    U: object
    S_param: float
    Q: object
    T: float
    d: float
    b_ratio: object
    bound_ok: Optional[bool]
    formalism: PhaseFormalism
    provenance: str = "exact"
    uncertainty_product: float = 0.0
    product_bound: float = 0.0
    product_bound_alt: Optional[float] = None
    spec: Optional[ProcessSpec] = None

    @property
    def product_bound_ok(self) -> bool:
        return self.uncertainty_product >= self.product_bound - BOUND_TOL


def cn_parameters(
    m: MomentSet,
    formalism: PhaseFormalism,
    provenance: str = "exact",
    spec: Optional[ProcessSpec] = None,
) -> CNResult:
    phase_sq = m.mean_S**2 + m.mean_C**2
    T = m.var_S + m.var_C
    U = m.var_N * T / phase_sq if phase_sq >= DENOM_FLOOR else UNDEF
    S_param = m.var_N * m.var_S
    Q = S_param / m.mean_C**2 if m.mean_C**2 >= DENOM_FLOOR else UNDEF
    if formalism.tag == "SG":
        ceiling = 1.0 - m.mean_P0 / 2
        bound = m.mean_P0**2 / 16
        alt = None
    else:
        ceiling = 1.0
        scale = formalism.n_bar + 0.5
        bound = 1.0 / (16 * scale**2)
        alt = 1.0 / (16 * scale)
    b_ratio = T / (ceiling - T) if ceiling - T > 0 else UNDEF
    bound_ok = None if U is UNDEF else U >= U_LOWER_BOUND - BOUND_TOL
    return CNResult(
        U=U,
        S_param=S_param,
        Q=Q,
        T=T,
        d=m.var_N - m.mean_N,
        b_ratio=b_ratio,
        bound_ok=bound_ok,
        formalism=formalism,
        provenance=provenance,
        uncertainty_product=m.var_C * m.var_S,
        product_bound=bound,
        product_bound_alt=alt,
        spec=spec,
    )


@dataclass(frozen=True)
class ComparisonReport:
    abs_diff: dict
    rel_diff: dict
    tol: float
    worst_field: str = ""
    worst: float = 0.0
    passed: bool = True
    fields: tuple = field(default=COMPARED_FIELDS)


def _diff(a, b):
    if a is UNDEF or b is UNDEF:
        return (0.0, 0.0) if a is b else (math.inf, math.inf)
    delta = abs(a - b)
    ref = abs(b)
    return delta, (delta if ref < RELATIVE_SWITCH else delta / ref)


def compare(
    exact: CNResult,
    moments: MomentSet,
    formula: ClosedFormResult,
    tol: float = 1e-3,
    fields: Iterable[str] = COMPARED_FIELDS,
) -> ComparisonReport:
    """Per-field differences between an exact-pipeline result and the formulas.

    Relative differences are used unless the formula value is below 1e-12 in
    magnitude, where the absolute difference is reported instead.
    """
    if exact.spec is not None and exact.spec != formula.spec:
        raise SpecMismatch("exact result and formula were computed for different specs")
    measured = {
        "U": exact.U,
        "S_param": exact.S_param,
        "Q": exact.Q,
        "N_bar": moments.mean_N,
        "var_N": moments.var_N,
        "d": exact.d,
    }
    fields = tuple(fields)
    abs_diff, rel_diff = {}, {}
    for name in fields:
        abs_diff[name], rel_diff[name] = _diff(measured[name], getattr(formula, name))
    worst_field = max(fields, key=lambda k: rel_diff[k])
    worst = rel_diff[worst_field]
    return ComparisonReport(
        abs_diff=abs_diff,
        rel_diff=rel_diff,
        tol=tol,
        worst_field=worst_field,
        worst=worst,
        passed=worst <= tol,
        fields=fields,
    )


@dataclass(frozen=True)
class SlopeEstimate:
    slope: float
    intercept: float
    residual: float
    points: tuple


def convergence_slope(points) -> SlopeEstimate:
    """Least-squares slope of ``log(error)`` against ``log(gt)``."""
    points = tuple((float(x), float(e)) for x, e in points)
    if len(points) < 3:
        raise InsufficientPoints(f"need at least 3 points, got {len(points)}")
    xs = np.array([p[0] for p in points])
    errs = np.array([p[1] for p in points])
    if np.any(xs <= 0):
        raise ValueError("abscissae must be positive for a log-log fit")
    if np.any(errs <= ERROR_FLOOR):
        raise ErrorBelowFloor(
            f"errors must exceed the numerical floor {ERROR_FLOOR:g}: {errs.tolist()}"
        )
    lx, ly = np.log(xs), np.log(errs)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return SlopeEstimate(
        slope=float(slope),
        intercept=float(intercept),
        residual=float(np.sqrt(np.mean(resid**2))),
        points=points,
    )
