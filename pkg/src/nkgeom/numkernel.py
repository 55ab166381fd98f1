"""Dense real linear algebra with explicit tolerances.

Subspaces are stored through an orthonormal basis and compared through
their orthogonal projectors, never through the basis itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, EmptySpanError, SymmetryError


@dataclass(frozen=True)
class Tolerance:
    """Residual threshold and eigenvalue clustering threshold."""

    eps_zero: float = 1e-9
    eps_cluster: float = 1e-7

    def __post_init__(self):
        if not (0 < self.eps_zero < self.eps_cluster < 1e-3):
            raise ValueError(
                f"need 0 < eps_zero < eps_cluster < 1e-3, got "
                f"eps_zero={self.eps_zero}, eps_cluster={self.eps_cluster}"
            )


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^n held as an n x d matrix with orthonormal columns."""

    basis: np.ndarray
    projector: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise DimensionError(f"basis must be 2-dimensional, got shape {b.shape}")
        if b.shape[1] > b.shape[0]:
            raise DimensionError(f"{b.shape[1]} basis vectors in dimension {b.shape[0]}")
        b = b.copy()
        b.setflags(write=False)
        p = b @ b.T
        p.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "projector", p)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(np.eye(ambient_dim))

    @classmethod
    def coordinate(cls, ambient_dim: int, indices: Iterable[int]) -> "Subspace":
        eye = np.eye(ambient_dim)
        return cls(eye[:, list(indices)])

    def complement(self, tol: Tolerance = DEFAULT_TOL) -> "Subspace":
        """Orthogonal complement."""
        n = self.ambient_dim
        if self.dim == 0:
            return Subspace.full(n)
        if self.dim == n:
            return Subspace.zero(n)
        q, _ = np.linalg.qr(self.basis, mode="complete")
        return Subspace(q[:, self.dim:])

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.projector @ x

    def residual_of(self, x: np.ndarray) -> float:
        """Norm of the part of x orthogonal to the subspace."""
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.projector @ x))

    def contains_vector(self, x: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.residual_of(x) < tol.eps_zero

    def check(self, tol: Tolerance = DEFAULT_TOL) -> float:
        """Return the orthonormality defect; raise if it exceeds eps_zero."""
        gram = self.basis.T @ self.basis
        defect = float(np.max(np.abs(gram - np.eye(self.dim)), initial=0.0))
        if defect >= tol.eps_zero:
            raise ValueError(f"basis not orthonormal (defect {defect:.3e})")
        return defect

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def orthonormalize(vectors: Sequence[np.ndarray], tol: Tolerance = DEFAULT_TOL,
                   allow_empty: bool = False) -> Subspace:
    """Span of the given vectors via Gram-Schmidt with reorthogonalization.

    A vector whose component orthogonal to the running span has norm below
    eps_zero is discarded.
    """
    vecs = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not vecs:
        raise EmptySpanError("no vectors given")
    n = vecs[0].shape[0]
    for v in vecs:
        if v.shape[0] != n:
            raise DimensionError("vectors of different lengths")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite entries")
    cols: List[np.ndarray] = []
    for v in vecs:
        w = v.copy()
        for _ in range(2):
            for q in cols:
                w -= (q @ w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol.eps_zero:
            cols.append(w / nrm)
    if not cols:
        if allow_empty:
            return Subspace.zero(n)
        raise EmptySpanError("all input vectors are numerically zero")
    return Subspace(np.column_stack(cols))


def span_columns(mat: np.ndarray, tol: Tolerance = DEFAULT_TOL,
                 allow_empty: bool = True) -> Subspace:
    """Orthonormal basis of the column space using an SVD rank cut."""
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    if mat.size == 0:
        return Subspace.zero(n)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > tol.eps_zero))
    if rank == 0:
        if allow_empty:
            return Subspace.zero(n)
        raise EmptySpanError("all input vectors are numerically zero")
    return Subspace(u[:, :rank])


def subspace_sum(a: Subspace, b: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    _same_ambient(a, b)
    return span_columns(np.hstack([a.basis, b.basis]), tol)


def intersection(a: Subspace, b: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Intersection computed from principal angles."""
    _same_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(a.ambient_dim)
    u, s, _ = np.linalg.svd(a.basis.T @ b.basis)
    k = int(np.sum(s > 1.0 - tol.eps_cluster))
    return Subspace(a.basis @ u[:, :k]) if k else Subspace.zero(a.ambient_dim)


def _same_ambient(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def subspace_contains(a: Subspace, b: Subspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True when a is contained in b."""
    _same_ambient(a, b)
    if a.dim == 0:
        return True
    escape = a.basis - b.projector @ a.basis
    return float(np.max(np.abs(escape))) < tol.eps_zero


def subspace_equal(a: Subspace, b: Subspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    _same_ambient(a, b)
    return a.dim == b.dim and subspace_contains(a, b, tol) and subspace_contains(b, a, tol)


def projector_distance(a: Subspace, b: Subspace) -> float:
    _same_ambient(a, b)
    return float(np.max(np.abs(a.projector - b.projector), initial=0.0))


@dataclass(frozen=True)
class Eigenspace:
    value: float
    space: Subspace

    @property
    def multiplicity(self) -> int:
        return self.space.dim


def sym_eig(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> List[Eigenspace]:
    """Eigenvalues in ascending order with clustered eigenspaces.

    Consecutive eigenvalues closer than eps_cluster are merged and reported
    by their mean.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"square matrix required, got shape {a.shape}")
    asym = float(np.max(np.abs(a - a.T), initial=0.0))
    if asym >= tol.eps_zero:
        raise SymmetryError(f"matrix not symmetric (defect {asym:.3e})")
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    out: List[Eigenspace] = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > tol.eps_cluster:
            out.append(Eigenspace(float(np.mean(w[start:i])), Subspace(v[:, start:i])))
            start = i
    return out


def mat_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential; the zero matrix maps exactly to the identity."""
    a = np.asarray(a, dtype=float)
    if not np.any(a):
        return np.eye(a.shape[0])
    return scipy.linalg.expm(a)


def random_subspace(rng: np.random.Generator, n: int, d: int) -> Subspace:
    """Uniformly distributed d-plane from an orthonormalized Gaussian frame."""
    q, r = np.linalg.qr(rng.standard_normal((n, d)))
    return Subspace(q * np.sign(np.diag(r)))


def random_frames(rng: np.random.Generator, count: int, n: int, d: int) -> np.ndarray:
    """Batch of orthonormal n x d frames, shape (count, n, d)."""
    q, r = np.linalg.qr(rng.standard_normal((count, n, d)))
    signs = np.sign(np.diagonal(r, axis1=1, axis2=2))
    return q * signs[:, None, :]
