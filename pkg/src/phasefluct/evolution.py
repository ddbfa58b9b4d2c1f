"""Exact evolution on the truncated space and short-time Heisenberg expansions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import LeakageExceeded, NonHermitianGenerator, NumericalError, SpaceMismatch
from .fock import (
    DEFAULT_LEAKAGE_THRESHOLD,
    ModeOperator,
    StateVector,
    commutator,
    leakage,
    max_shift,
)

MAX_TAYLOR_ORDER = 4

# blocks larger than this are propagated by Taylor stepping instead of eigh
DENSE_BLOCK_LIMIT = 2048
_TAYLOR_STEP_NORM = 1.0
_MAX_TAYLOR_TERMS = 60


@dataclass(frozen=True)
class EvolutionSettings:
    accuracy: float = 1e-10
    leakage_threshold: float = DEFAULT_LEAKAGE_THRESHOLD

    def __post_init__(self):
        if self.accuracy <= 0:
            raise ValueError("accuracy target must be positive")
        if self.leakage_threshold <= 0:
            raise ValueError("leakage threshold must be positive")


def boundary_width(H: ModeOperator) -> np.ndarray:
    """How close to a cutoff a mode may sit before ``H`` can push it out."""
    return np.maximum(max_shift(H), 1)


def _taylor_action(block, psi: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i t block) psi`` by fixed-size substeps of a truncated Taylor series."""
    norm1 = float(abs(block).sum(axis=0).max()) if block.nnz else 0.0
    steps = max(1, math.ceil(t * norm1 / _TAYLOR_STEP_NORM))
    h = -1j * t / steps
    out = psi.astype(complex)
    for _ in range(steps):
        term = out
        total = out.copy()
        for k in range(1, _MAX_TAYLOR_TERMS + 1):
            term = (h / k) * (block @ term)
            total += term
            if np.max(np.abs(term)) <= 2.0**-53 * np.max(np.abs(total)):
                break
        out = total
    return out


def _propagate(H: ModeOperator, psi: np.ndarray, t: float) -> np.ndarray:
    """Apply ``exp(-i H t)`` block by block.

    The number-conserving couplings split the basis into small connected
    components of the sparsity graph; each is diagonalized exactly.
    """
    m = H.matrix
    n_comp, labels = connected_components(abs(m), directed=False)
    order = np.argsort(labels, kind="stable")
    starts = np.searchsorted(labels[order], np.arange(n_comp + 1))
    out = np.zeros_like(psi, dtype=complex)
    for c in range(n_comp):
        idx = order[starts[c]:starts[c + 1]]
        amp = psi[idx]
        if not np.any(amp):
            continue
        block = m[idx][:, idx]
        if len(idx) > DENSE_BLOCK_LIMIT:
            out[idx] = _taylor_action(block, amp, t)
            continue
        w, v = np.linalg.eigh(block.toarray())
        out[idx] = v @ (np.exp(-1j * t * w) * (v.conj().T @ amp))
    return out


def evolve(
    state: StateVector,
    H: ModeOperator,
    t: float,
    settings: EvolutionSettings | None = None,
) -> StateVector:
    """Return ``exp(-i H t) |psi>``.

    Exact to round-off: the generator is split into its connected blocks,
    which are diagonalized (or, if very large, Taylor-stepped).  Results are
    deterministic for fixed inputs.  Raises :class:`LeakageExceeded` if the
    evolved state puts more than the configured mass within one Hamiltonian
    step of any cutoff.
    """
    settings = settings or EvolutionSettings()
    if not H.hermitian:
        raise NonHermitianGenerator("evolution needs a hermitian generator")
    if H.space != state.space:
        raise SpaceMismatch("state and Hamiltonian live on different mode spaces")
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    if t == 0:
        return state
    psi = _propagate(H, np.asarray(state.amplitudes), t)
    drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if drift > settings.accuracy:
        raise NumericalError(f"norm drift {drift:.3e} above accuracy target")
    out = StateVector(state.space, psi)
    lost = leakage(out, boundary_width(H))
    if lost > settings.leakage_threshold:
        raise LeakageExceeded(
            f"evolved state has {lost:.3e} probability near the cutoffs "
            f"{state.space.cutoffs}; raise the cutoffs"
        )
    return out


@dataclass(frozen=True)
class TaylorExpansion:
    """``op(t) ~ sum_n t^n / n! * coefficients[n]``."""

    base: ModeOperator
    order: int
    coefficients: tuple

    def evaluate(self, t: float) -> ModeOperator:
        total = self.coefficients[0]
        for n, m in enumerate(self.coefficients[1:], start=1):
            total = total + m * (t**n / math.factorial(n))
        return total


def heisenberg_taylor(H: ModeOperator, op: ModeOperator, order: int) -> TaylorExpansion:
    """Short-time expansion of the Heisenberg-picture operator.

    The n-th derivative at t = 0 is the nested commutator ``(i ad_H)^n op``.
    """
    if not 0 <= order <= MAX_TAYLOR_ORDER:
        raise ValueError(f"order must be between 0 and {MAX_TAYLOR_ORDER}")
    coeffs = [op]
    for _ in range(order):
        coeffs.append(commutator(H, coeffs[-1]) * 1j)
    return TaylorExpansion(op, order, tuple(coeffs))


def evaluate(expansion: TaylorExpansion, t: float) -> ModeOperator:
    return expansion.evaluate(t)


__all__ = [
    "EvolutionSettings",
    "TaylorExpansion",
    "boundary_width",
    "evaluate",
    "evolve",
    "heisenberg_taylor",
    "leakage",
]
