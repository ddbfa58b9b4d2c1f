"""Truncated multi-mode Fock space: basis bookkeeping, ladder operators, states.

Modes are ordered as given by the caller; the tensor basis is the row-major
product of the per-mode bases, so the last mode varies fastest.  All
operators are stored as complex CSR matrices.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .errors import (
    DimensionBudgetExceeded,
    DuplicatePumpRole,
    EmptyModeList,
    InsufficientCutoff,
    InvalidModeIndex,
    NegativeVariance,
    NonHermitianVariance,
    SpaceError,
    SpaceMismatch,
)

ROLES = ("pump", "stokes", "signal", "harmonic")

DEFAULT_DIM_BUDGET = 10**6
NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-12
VARIANCE_CLAMP = 1e-12
DEFAULT_LEAKAGE_THRESHOLD = 1e-8


@dataclass(frozen=True)
class ModeSpace:
    """Descriptor of a truncated tensor-product Fock basis.

    Parameters
    ----------
    mode_roles : tuple of str
        One role label per mode, drawn from ``ROLES``.  Exactly one mode
        must be the pump.
    cutoffs : tuple of int
        Maximum occupation number per mode; mode ``i`` has ``cutoffs[i] + 1``
        basis states.
    """

    mode_roles: tuple
    cutoffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "mode_roles", tuple(self.mode_roles))
        object.__setattr__(self, "cutoffs", tuple(int(c) for c in self.cutoffs))
        if not self.mode_roles:
            raise EmptyModeList("a mode space needs at least one mode")
        if len(self.mode_roles) != len(self.cutoffs):
            raise SpaceError(
                f"{len(self.mode_roles)} roles but {len(self.cutoffs)} cutoffs"
            )
        for role in self.mode_roles:
            if role not in ROLES:
                raise SpaceError(f"unknown mode role {role!r}")
        if self.mode_roles.count("pump") > 1:
            raise DuplicatePumpRole("exactly one mode may carry the pump role")
        if self.mode_roles.count("pump") == 0:
            raise SpaceError("no mode carries the pump role")
        if any(c < 1 for c in self.cutoffs):
            raise SpaceError(f"cutoffs must be >= 1, got {self.cutoffs}")

    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def dims(self) -> tuple:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def pump_mode(self) -> int:
        return self.mode_roles.index("pump")

    def mode_index(self, role: str) -> int:
        try:
            return self.mode_roles.index(role)
        except ValueError:
            raise InvalidModeIndex(f"no mode with role {role!r}") from None

    def check_mode(self, mode: int) -> int:
        if not isinstance(mode, (int, np.integer)) or not 0 <= mode < self.n_modes:
            raise InvalidModeIndex(
                f"mode index {mode!r} out of range for {self.n_modes} modes"
            )
        return int(mode)

    @cached_property
    def occupations(self) -> np.ndarray:
        """``(total_dim, n_modes)`` integer array of occupation numbers."""
        grids = np.indices(self.dims).reshape(self.n_modes, -1).T
        grids.setflags(write=False)
        return grids

    def index(self, occupation: Sequence[int]) -> int:
        if len(occupation) != self.n_modes:
            raise SpaceError("occupation tuple has the wrong length")
        for n, c in zip(occupation, self.cutoffs):
            if not 0 <= n <= c:
                raise SpaceError(f"occupation {tuple(occupation)} outside the basis")
        return int(np.ravel_multi_index(tuple(occupation), self.dims))

    def interior_indices(self, margin: Union[int, Sequence[int]] = 1) -> np.ndarray:
        """Basis indices whose occupations all satisfy ``n <= cutoff - margin``.

        ``margin=1`` is the usual "no support at any cutoff" subspace.  Larger
        margins are needed when comparing products of operators that step
        several quanta at once.
        """
        margins = np.broadcast_to(np.asarray(margin, dtype=int), (self.n_modes,))
        limit = np.asarray(self.cutoffs) - margins
        mask = np.all(self.occupations <= limit, axis=1)
        return np.flatnonzero(mask)

    def basis_state(self, occupation: Sequence[int]) -> "StateVector":
        amps = np.zeros(self.total_dim, dtype=complex)
        amps[self.index(occupation)] = 1.0
        return StateVector(self, amps)

    def vacuum(self) -> "StateVector":
        return self.basis_state([0] * self.n_modes)


def build_space(
    roles: Sequence[str],
    cutoffs: Sequence[int],
    budget: int = DEFAULT_DIM_BUDGET,
) -> ModeSpace:
    """Validate roles/cutoffs and return a :class:`ModeSpace`."""
    if len(roles) == 0:
        raise EmptyModeList("a mode space needs at least one mode")
    space = ModeSpace(tuple(roles), tuple(cutoffs))
    if space.total_dim > budget:
        raise DimensionBudgetExceeded(
            f"total dimension {space.total_dim} exceeds budget {budget}"
        )
    return space


@dataclass(frozen=True)
class PumpAmplitude:
    """Coherent pump amplitude ``alpha = magnitude * exp(i * phase)``."""

    magnitude: float
    phase: float = 0.0
    # exact |alpha|^2 when built from it, so it round-trips without sqrt error
    alpha_sq: Optional[float] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("pump magnitude must be non-negative")

    @classmethod
    def from_alpha_sq(cls, alpha_sq: float, theta: float = 0.0) -> "PumpAmplitude":
        if alpha_sq < 0:
            raise ValueError("|alpha|^2 must be non-negative")
        return cls(math.sqrt(alpha_sq), theta, float(alpha_sq))

    @classmethod
    def from_complex(cls, alpha: complex) -> "PumpAmplitude":
        return cls(abs(alpha), cmath.phase(alpha))

    @property
    def value(self) -> complex:
        return cmath.rect(self.magnitude, self.phase)

    @property
    def mean_photons(self) -> float:
        if self.alpha_sq is not None:
            return self.alpha_sq
        return self.magnitude**2


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state over the tensor basis of ``space``."""

    space: ModeSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.total_dim,):
            raise SpaceMismatch(
                f"amplitude vector has shape {amps.shape}, "
                f"space dimension is {self.space.total_dim}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm_sq!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, space: ModeSpace, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(space, amps / np.linalg.norm(amps))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Sparse operator on the tensor basis of ``space``."""

    space: ModeSpace
    matrix: sp.csr_matrix
    hermitian: bool = False

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        m.sum_duplicates()
        m.sort_indices()
        n = self.space.total_dim
        if m.shape != (n, n):
            raise SpaceMismatch(f"operator shape {m.shape} does not match dimension {n}")
        object.__setattr__(self, "matrix", m)
        if self.hermitian and hermiticity_defect(m) > HERMITIAN_TOL:
            raise ValueError("operator flagged hermitian but M - M^dagger is not zero")

    def _check(self, other: "ModeOperator"):
        if other.space != self.space:
            raise SpaceMismatch("operators live on different mode spaces")

    def __add__(self, other):
        if not isinstance(other, ModeOperator):
            return NotImplemented
        self._check(other)
        return ModeOperator(
            self.space, self.matrix + other.matrix, self.hermitian and other.hermitian
        )

    def __sub__(self, other):
        if not isinstance(other, ModeOperator):
            return NotImplemented
        self._check(other)
        return ModeOperator(
            self.space, self.matrix - other.matrix, self.hermitian and other.hermitian
        )

    def __neg__(self):
        return ModeOperator(self.space, -self.matrix, self.hermitian)

    def __mul__(self, c):
        if not isinstance(c, (int, float, complex, np.number)):
            return NotImplemented
        real = complex(c).imag == 0
        return ModeOperator(self.space, self.matrix * c, self.hermitian and real)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __matmul__(self, other):
        if isinstance(other, ModeOperator):
            self._check(other)
            return ModeOperator(self.space, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            if other.space != self.space:
                raise SpaceMismatch("operator and state live on different mode spaces")
            return self.matrix @ other.amplitudes
        return NotImplemented

    def dag(self) -> "ModeOperator":
        return ModeOperator(self.space, self.matrix.conj().T.tocsr(), self.hermitian)

    def apply(self, state: StateVector) -> np.ndarray:
        """Unnormalized image ``M|psi>``."""
        return self @ state

    def as_hermitian(self) -> "ModeOperator":
        """Return the same matrix with the hermitian flag set (checked)."""
        return ModeOperator(self.space, self.matrix, True)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def hermiticity_defect(m) -> float:
    diff = (m - m.conj().T).tocsr()
    return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0


# --- operator algebra ----------------------------------------------------


def add(a: ModeOperator, b: ModeOperator) -> ModeOperator:
    return a + b


def scale(a: ModeOperator, c: complex) -> ModeOperator:
    return a * c


def multiply(a: ModeOperator, b: ModeOperator) -> ModeOperator:
    return a @ b


def adjoint(a: ModeOperator) -> ModeOperator:
    return a.dag()


def commutator(a: ModeOperator, b: ModeOperator) -> ModeOperator:
    """``AB - BA``; anti-hermitian when both arguments are hermitian."""
    a._check(b)
    return ModeOperator(a.space, a.matrix @ b.matrix - b.matrix @ a.matrix)


def max_entry_difference(
    a: ModeOperator, b: ModeOperator, indices: np.ndarray | None = None
) -> float:
    """Largest ``|A_ij - B_ij|`` over rows and columns in ``indices``."""
    a._check(b)
    diff = (a.matrix - b.matrix).tocsr()
    if indices is not None:
        diff = diff[indices][:, indices]
    return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0


def max_shift(op: ModeOperator) -> np.ndarray:
    """Per-mode maximum change of occupation number over the nonzero entries."""
    coo = op.matrix.tocoo()
    mask = np.abs(coo.data) > 0
    if not mask.any():
        return np.zeros(op.space.n_modes, dtype=int)
    occ = op.space.occupations
    return np.max(np.abs(occ[coo.row[mask]] - occ[coo.col[mask]]), axis=0)


# --- elementary operators -------------------------------------------------


def _embed(space: ModeSpace, mode: int, local) -> sp.csr_matrix:
    factors = [sp.identity(d, dtype=complex, format="csr") for d in space.dims]
    factors[mode] = sp.csr_matrix(local, dtype=complex)
    out = factors[0]
    for f in factors[1:]:
        out = sp.kron(out, f, format="csr")
    return out


def identity(space: ModeSpace) -> ModeOperator:
    return ModeOperator(space, sp.identity(space.total_dim, dtype=complex, format="csr"), True)


def ladder(space: ModeSpace, mode: int, direction: str = "lower") -> ModeOperator:
    """Annihilation (``"lower"``) or creation (``"raise"``) operator on one mode."""
    mode = space.check_mode(mode)
    if direction not in ("lower", "raise"):
        raise ValueError(f"direction must be 'lower' or 'raise', got {direction!r}")
    cutoff = space.cutoffs[mode]
    local = sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)
    op = ModeOperator(space, _embed(space, mode, local))
    return op if direction == "lower" else op.dag()


def diagonal_op(space: ModeSpace, mode: int, values) -> ModeOperator:
    """Operator ``f(N_mode)`` given the values ``f(0), ..., f(cutoff)``."""
    mode = space.check_mode(mode)
    values = np.asarray(values)
    if values.shape != (space.dims[mode],):
        raise ValueError("need one value per occupation level of the mode")
    herm = bool(np.all(np.isreal(values)))
    return ModeOperator(space, _embed(space, mode, sp.diags(values)), herm)


def number_op(space: ModeSpace, mode: int) -> ModeOperator:
    mode = space.check_mode(mode)
    return diagonal_op(space, mode, np.arange(space.dims[mode], dtype=float))


# --- states and expectations ----------------------------------------------


def default_pump_cutoff(alpha_sq: float) -> int:
    """Pump truncation covering the coherent tail, never below 23."""
    magnitude = math.sqrt(alpha_sq)
    return max(23, math.ceil(alpha_sq + 8 * magnitude + 10))


def leakage(state: StateVector, width: Union[int, Sequence[int]] = 1) -> float:
    """Probability mass on basis states with any mode within ``width`` of its cutoff.

    ``width=1`` counts only states sitting at a cutoff.
    """
    space = state.space
    widths = np.broadcast_to(np.asarray(width, dtype=int), (space.n_modes,))
    edge = np.asarray(space.cutoffs) - widths
    at_edge = np.any(space.occupations > edge, axis=1)
    return float(np.sum(state.probabilities()[at_edge]))


def coherent_pump_state(
    space: ModeSpace,
    alpha: Union[PumpAmplitude, complex],
    leakage_threshold: float = DEFAULT_LEAKAGE_THRESHOLD,
) -> StateVector:
    """Truncated, renormalized coherent state on the pump; vacuum elsewhere."""
    if isinstance(alpha, PumpAmplitude):
        alpha = alpha.value
    pump = space.pump_mode
    cutoff = space.cutoffs[pump]
    local = np.empty(cutoff + 1, dtype=complex)
    local[0] = 1.0
    for n in range(1, cutoff + 1):
        local[n] = local[n - 1] * alpha / math.sqrt(n)
    local /= np.linalg.norm(local)
    edge_mass = float(abs(local[-1]) ** 2)
    if edge_mass > leakage_threshold:
        raise InsufficientCutoff(
            f"pump cutoff {cutoff} too small for |alpha|^2={abs(alpha) ** 2:g}: "
            f"mass {edge_mass:.3e} at the cutoff exceeds {leakage_threshold:g}"
        )
    amps = np.ones(1, dtype=complex)
    for mode, dim in enumerate(space.dims):
        if mode == pump:
            factor = local
        else:
            factor = np.zeros(dim, dtype=complex)
            factor[0] = 1.0
        amps = np.kron(amps, factor)
    return StateVector(space, amps)


def expectation(state: StateVector, op: ModeOperator) -> complex:
    if state.space != op.space:
        raise SpaceMismatch("state and operator live on different mode spaces")
    psi = state.amplitudes
    return complex(np.vdot(psi, op.matrix @ psi))


def variance(state: StateVector, op: ModeOperator) -> float:
    """``<M^2> - <M>^2`` for hermitian ``M``; tiny negative round-off clamps to 0."""
    if state.space != op.space:
        raise SpaceMismatch("state and operator live on different mode spaces")
    if not op.hermitian:
        raise NonHermitianVariance("variance needs a hermitian operator")
    v = op.matrix @ state.amplitudes
    mean = float(np.vdot(state.amplitudes, v).real)
    var = float(np.vdot(v, v).real) - mean * mean
    if var < 0:
        if var < -VARIANCE_CLAMP:
            raise NegativeVariance(f"variance {var!r} is negative beyond round-off")
        var = 0.0
    return var
