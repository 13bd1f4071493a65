"""Dense complex operator algebra on a finite-dimensional Hilbert space.

Operator types validate their defining invariants at construction and are
immutable afterwards.  Spectral routines are built on Hermitian
eigendecomposition, which is exact (to rounding) for the matrix exponentials
and spectral projectors needed here; nothing in this module is intended for
dimensions beyond a few dozen.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    DimensionMismatch,
    InvariantViolation,
    NoConvergence,
    NonHermitianInput,
    OverlappingWindows,
    UncoveredEigenvalue,
    ZeroSpan,
)

__all__ = [
    "Operator",
    "HermitianOperator",
    "Projector",
    "UnitaryOperator",
    "DensityOperator",
    "SpectralWindow",
    "EigenSpace",
    "spectral_decompose",
    "spectral_projectors",
    "evolution_operator",
    "projector_from_span",
    "subspace_intersection",
    "alternating_projection_limit",
    "commutator_norm",
    "subspace_inclusion",
    "max_entry_norm",
]


def _as_square_complex(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvariantViolation(f"expected a square matrix, got shape {arr.shape}")
    return arr


def max_entry_norm(matrix) -> float:
    """Largest entry magnitude of a matrix (zero for empty input)."""
    arr = np.asarray(matrix)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def _hermitian_part(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


class Operator:
    """Immutable dense complex matrix acting on C^dim."""

    def __init__(self, matrix):
        arr = _as_square_complex(matrix)
        arr.setflags(write=False)
        self._matrix = arr

    @property
    def matrix(self) -> np.ndarray:
        """The underlying (read-only) complex matrix."""
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self._matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self._matrix))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class HermitianOperator(Operator):
    """Operator constrained to be self-adjoint within ``tols.herm``."""

    def __init__(self, matrix, *, tols: Tolerances = DEFAULT_TOLERANCES):
        super().__init__(matrix)
        residual = max_entry_norm(self._matrix - self._matrix.conj().T)
        if residual > tols.herm:
            raise NonHermitianInput(
                f"matrix deviates from self-adjointness by {residual:.3e} "
                f"(tolerance {tols.herm:.1e})"
            )

    @classmethod
    def zero(cls, dim: int) -> "HermitianOperator":
        return cls(np.zeros((dim, dim), dtype=np.complex128))


class Projector(HermitianOperator):
    """Orthogonal projector: Hermitian and idempotent; rank is its trace."""

    def __init__(self, matrix, *, tols: Tolerances = DEFAULT_TOLERANCES):
        super().__init__(matrix, tols=tols)
        residual = max_entry_norm(self._matrix @ self._matrix - self._matrix)
        if residual > tols.proj:
            raise InvariantViolation(
                f"matrix is not idempotent: |P^2 - P| = {residual:.3e} "
                f"(tolerance {tols.proj:.1e})"
            )
        self._rank = int(round(float(np.trace(self._matrix).real)))

    @property
    def rank(self) -> int:
        return self._rank

    @classmethod
    def identity(cls, dim: int) -> "Projector":
        return cls(np.eye(dim, dtype=np.complex128))

    @classmethod
    def zero(cls, dim: int) -> "Projector":
        return cls(np.zeros((dim, dim), dtype=np.complex128))

    def complement(self, *, tols: Tolerances = DEFAULT_TOLERANCES) -> "Projector":
        """Projector onto the orthogonal complement of the range."""
        return Projector(np.eye(self.dim) - self._matrix, tols=tols)

    def __repr__(self) -> str:
        return f"Projector(dim={self.dim}, rank={self.rank})"


class UnitaryOperator(Operator):
    """Operator with U U^dag = I within ``tols.unit``."""

    def __init__(self, matrix, *, tols: Tolerances = DEFAULT_TOLERANCES):
        super().__init__(matrix)
        residual = max_entry_norm(
            self._matrix @ self._matrix.conj().T - np.eye(self.dim)
        )
        if residual > tols.unit:
            raise InvariantViolation(
                f"matrix is not unitary: |U U^dag - I| = {residual:.3e} "
                f"(tolerance {tols.unit:.1e})"
            )

    def inverse(self) -> "UnitaryOperator":
        return UnitaryOperator(self._matrix.conj().T)


class DensityOperator(HermitianOperator):
    """State operator: self-adjoint, unit trace, positive semidefinite."""

    def __init__(self, matrix, *, tols: Tolerances = DEFAULT_TOLERANCES):
        super().__init__(matrix, tols=tols)
        tr = float(np.trace(self._matrix).real)
        if abs(tr - 1.0) > tols.trace:
            raise InvariantViolation(
                f"state trace is {tr!r}, deviates from 1 beyond {tols.trace:.1e}"
            )
        lowest = float(np.linalg.eigvalsh(self._matrix)[0])
        if lowest < -tols.psd:
            raise InvariantViolation(
                f"state has negative eigenvalue {lowest:.3e} "
                f"(floor -{tols.psd:.1e})"
            )

    @classmethod
    def from_state_vector(
        cls, vector, *, tols: Tolerances = DEFAULT_TOLERANCES
    ) -> "DensityOperator":
        """Pure state |v><v| / <v|v> from a nonzero vector."""
        v = np.asarray(vector, dtype=np.complex128).reshape(-1)
        norm2 = float(np.vdot(v, v).real)
        if norm2 <= 0.0:
            raise ZeroSpan("state vector is numerically zero")
        return cls(np.outer(v, v.conj()) / norm2, tols=tols)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    def evolved(
        self,
        unitary: UnitaryOperator,
        *,
        tols: Tolerances = DEFAULT_TOLERANCES,
    ) -> "DensityOperator":
        """Conjugated state U rho U^dag."""
        u = unitary.matrix
        return DensityOperator(u @ self._matrix @ u.conj().T, tols=tols)


@dataclass(frozen=True)
class SpectralWindow:
    """Half-open interval [lo, hi) on the eigenvalue axis with a label."""

    label: str
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvariantViolation(
                f"window {self.label!r} has lo={self.lo} >= hi={self.hi}"
            )

    def contains(self, value: float) -> bool:
        return self.lo <= value < self.hi

    def overlaps(self, other: "SpectralWindow") -> bool:
        return self.lo < other.hi and other.lo < self.hi


class EigenSpace(NamedTuple):
    """One clustered eigenvalue with an orthonormal basis of its eigenspace."""

    eigenvalue: float
    vectors: np.ndarray  # shape (dim, multiplicity), orthonormal columns


def spectral_decompose(
    A: HermitianOperator, *, tols: Tolerances = DEFAULT_TOLERANCES
) -> list[EigenSpace]:
    """Eigendecomposition of a Hermitian operator with degeneracy clustering.

    Eigenvalues closer than ``tols.rank`` are merged into a single eigenspace
    (reported eigenvalue is the cluster mean), so that near-degenerate levels
    yield one projector instead of an arbitrary split.

    Returns eigenspaces in ascending eigenvalue order.  Raises
    ``NonHermitianInput`` for inputs that fail the Hermiticity check.
    """
    if not isinstance(A, HermitianOperator):
        A = HermitianOperator(np.asarray(A, dtype=np.complex128), tols=tols)
    w, v = np.linalg.eigh(A.matrix)
    spaces: list[EigenSpace] = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > tols.rank:
            block = v[:, start:i]
            spaces.append(EigenSpace(float(np.mean(w[start:i])), block))
            start = i
    return spaces


def spectral_projectors(
    A: HermitianOperator,
    partition: Sequence[SpectralWindow],
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> list[Projector]:
    """Projectors onto the eigenspaces selected by a spectral partition.

    Each window collects every (clustered) eigenvalue it contains; the
    returned projectors follow the partition order, are mutually exclusive,
    and sum to the identity.

    Raises
    ------
    OverlappingWindows
        If any two windows intersect.
    UncoveredEigenvalue
        If some eigenvalue of ``A`` lies in no window.
    """
    windows = list(partition)
    if not windows:
        raise InvariantViolation("partition must contain at least one window")
    for i in range(len(windows)):
        for j in range(i + 1, len(windows)):
            if windows[i].overlaps(windows[j]):
                raise OverlappingWindows(
                    f"windows {windows[i].label!r} and {windows[j].label!r} overlap"
                )
    spaces = spectral_decompose(A, tols=tols)
    dim = A.dim
    blocks: list[np.ndarray] = [np.zeros((dim, dim), dtype=np.complex128) for _ in windows]
    for space in spaces:
        hits = [k for k, win in enumerate(windows) if win.contains(space.eigenvalue)]
        if not hits:
            raise UncoveredEigenvalue(
                f"eigenvalue {space.eigenvalue!r} lies in no window"
            )
        blocks[hits[0]] += space.vectors @ space.vectors.conj().T
    return [Projector(block, tols=tols) for block in blocks]


def evolution_operator(
    H: HermitianOperator,
    t_from: float,
    t_to: float,
    hbar: float = 1.0,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> UnitaryOperator:
    """Unitary exp(-i H (t_to - t_from) / hbar) via eigendecomposition."""
    if hbar <= 0.0:
        raise InvariantViolation(f"hbar must be positive, got {hbar!r}")
    w, v = np.linalg.eigh(H.matrix)
    phases = np.exp(-1j * w * (t_to - t_from) / hbar)
    return UnitaryOperator((v * phases) @ v.conj().T, tols=tols)


def projector_from_span(
    vectors: Sequence, *, tols: Tolerances = DEFAULT_TOLERANCES
) -> Projector:
    """Orthogonal projector onto the span of the given vectors.

    Rank is decided by a relative singular-value cutoff at ``tols.rank``.
    Raises ``ZeroSpan`` when every vector is numerically zero.
    """
    cols = np.array([np.asarray(v, dtype=np.complex128).reshape(-1) for v in vectors]).T
    if cols.size == 0:
        raise ZeroSpan("no spanning vectors given")
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    if s[0] <= tols.rank:
        raise ZeroSpan("spanning vectors are numerically zero")
    keep = s > s[0] * tols.rank
    basis = u[:, keep]
    return Projector(basis @ basis.conj().T, tols=tols)


def _require_same_dim(a: Operator, b: Operator) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")


def subspace_intersection(
    P: Projector, Q: Projector, *, tols: Tolerances = DEFAULT_TOLERANCES
) -> Projector:
    """Projector onto range(P) ∩ range(Q) by exact subspace geometry.

    The intersection is the kernel of (I - P) + (I - Q); kernel vectors are
    read off a Hermitian eigendecomposition with eigenvalues below
    ``tols.rank``.
    """
    _require_same_dim(P, Q)
    dim = P.dim
    gap = (np.eye(dim) - P.matrix) + (np.eye(dim) - Q.matrix)
    w, v = np.linalg.eigh(gap)
    kernel = v[:, w < tols.rank]
    if kernel.shape[1] == 0:
        return Projector.zero(dim)
    return Projector(kernel @ kernel.conj().T, tols=tols)


def alternating_projection_limit(
    P: Projector,
    Q: Projector,
    tol: float = 1e-12,
    max_iter: int = 200,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> Projector:
    """Limit of (P Q)^n, realized by repeated squaring of the product.

    Each step squares the current power, so step ``k`` holds (P Q)^(2^k);
    iteration stops once the Hermitian part of the power stabilizes below
    ``tol`` in max-entry norm.  The stabilized power is symmetrized and
    snapped to the nearest projector by rounding its eigenvalues to {0, 1}.

    For commuting inputs the first step already fixes P Q.  Raises
    ``NoConvergence`` if ``max_iter`` squarings do not stabilize the power,
    or if the stabilized power is not within 0.1 of a projector spectrum.
    """
    _require_same_dim(P, Q)
    power = P.matrix @ Q.matrix
    limit = None
    for _ in range(max_iter):
        squared = power @ power
        delta = max_entry_norm(_hermitian_part(squared) - _hermitian_part(power))
        if delta <= tol:
            limit = squared
            break
        power = squared
    if limit is None:
        raise NoConvergence(
            f"power of the projector product did not stabilize within "
            f"{max_iter} squarings (tol {tol:.1e})"
        )
    w, v = np.linalg.eigh(_hermitian_part(limit))
    if np.any((w > 0.1) & (w < 0.9)):
        raise NoConvergence(
            "stabilized power has eigenvalues far from {0, 1}; "
            "the limit is not yet a projector"
        )
    kept = v[:, w >= 0.5]
    if kept.shape[1] == 0:
        return Projector.zero(P.dim)
    return Projector(kept @ kept.conj().T, tols=tols)


def commutator_norm(A: Operator, B: Operator) -> float:
    """Max-entry magnitude of the commutator A B - B A."""
    _require_same_dim(A, B)
    return max_entry_norm(A.matrix @ B.matrix - B.matrix @ A.matrix)


def subspace_inclusion(
    P: Projector, Q: Projector, *, tols: Tolerances = DEFAULT_TOLERANCES
) -> bool:
    """True iff range(P) is contained in range(Q), i.e. Q P = P."""
    _require_same_dim(P, Q)
    return max_entry_norm(Q.matrix @ P.matrix - P.matrix) <= tols.incl
