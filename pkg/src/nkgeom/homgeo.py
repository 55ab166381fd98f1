"""Geometry of a reductive homogeneous space at the base point.

Tensors are dense arrays in the orthonormal p-basis.  A tensor with ``m``
vector arguments and a vector value is stored with shape ``(n,)*(m+1)``,
the last axis being the value.  For example ``R[x, y, z, o]`` is the
o-component of R(e_x, e_y) e_z.

Covariant derivatives.  The canonical connection has parallel invariant
tensors and the Levi-Civita connection is the canonical one plus D, so
at the base point

    (nabla_V T)(X1, ..., Xm) = D_V (T(X1, ..., Xm)) - sum_i T(..., D_V Xi, ...).

Iterating this rule gives every higher derivative; the new derivative
direction always occupies the first slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (InputError, InternalConsistencyError, MissingFibrationError,
                     NotASubalgebraError, NotTangentError, OrderError)
from .liealg import ReductiveSpace
from .numkernel import (DEFAULT_TOL, Subspace, Tolerance, mat_exp, orthonormalize,
                        span_columns)

DEFAULT_ORDER = 4
DEFAULT_SAMPLES = 64


# --- tensor utilities -------------------------------------------------------

def derivation(t: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Apply the D-derivation rule to ``t``; the new slot comes first.

    ``d[v, y, o]`` is the o-component of D_{e_v} e_y.
    """
    m = t.ndim - 1
    out = np.moveaxis(np.tensordot(t, d, axes=([m], [1])), m, 0)
    for s in range(m):
        term = np.tensordot(d, t, axes=([2], [s]))
        out -= np.moveaxis(term, 1, s + 1)
    return out


def contract(t: np.ndarray, *vectors: np.ndarray) -> np.ndarray:
    """Evaluate the leading slots of ``t`` on the given vectors."""
    out = t
    for v in vectors:
        out = np.tensordot(np.asarray(v, dtype=float), out, axes=(0, 0))
    return out


def restrict(t: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Evaluate every input slot of ``t`` on the columns of ``basis``.

    Returns shape ``(d,)*m + (n,)``.
    """
    m = t.ndim - 1
    out = t
    for _ in range(m):
        out = np.tensordot(out, basis, axes=([0], [0]))
    return np.moveaxis(out, 0, -1)


def restrict_batch(t: np.ndarray, frames: np.ndarray) -> np.ndarray:
    """Batched ``restrict`` over frames of shape ``(N, n, d)``."""
    m = t.ndim - 1
    n = t.shape[-1]
    big, _, d = frames.shape
    ft = np.transpose(frames, (0, 2, 1))  # (N, d, n)
    out = ft @ t.reshape(n, -1)  # (N, d, n^m): first slot contracted
    for done in range(1, m):
        rest = n ** (m - done)
        # contract the next slot by broadcasting over the d^done leading indices
        out = (ft[:, None] @ out.reshape(big, d ** done, n, rest)).reshape(big, -1, rest)
    return out.reshape((big,) + (d,) * m + (n,))


def escape_norms(values: np.ndarray, projector: np.ndarray) -> np.ndarray:
    """Norms of the components of ``values`` (last axis) orthogonal to a subspace."""
    esc = values - values @ projector
    return np.linalg.norm(esc, axis=-1)


@dataclass(frozen=True)
class Witness:
    """A tensor slot at which invariance fails."""

    order: int
    indices: Tuple[int, ...]
    value: Tuple[float, ...]
    residual: float


@dataclass(frozen=True)
class TojoReport:
    residual: float
    worst_direction: Tuple[float, ...]
    samples: int


@dataclass(frozen=True)
class TGVerdict:
    is_tg: bool
    max_residual: float
    order_checked: int
    tojo_residual: float
    d_invariant: bool
    d_residual: float
    order_residuals: Tuple[float, ...]
    witness: Optional[Witness] = None
    samples: int = 0


@dataclass(frozen=True)
class DInvarianceReport:
    d_invariant: bool
    d_residual: float
    r_invariant: bool
    r_residual: float
    rc_invariant: bool
    rc_residual: float
    split_subalgebra: bool
    clause_i: bool
    clause_ii: bool
    clause_iii: bool

    @property
    def verdict(self) -> bool:
        return self.clause_i


@dataclass(frozen=True)
class SurfaceReport:
    passes: bool
    kappa: Optional[float]
    eigen_residual: float
    cartan_residual: float
    cyclic_span: Subspace


@dataclass(frozen=True)
class WellPositionedReport:
    well_positioned: bool
    worst_residual: float
    worst_direction: Tuple[float, ...]
    vertical_dim: int
    horizontal_dim: int


@dataclass(frozen=True)
class OrbitReport:
    totally_geodesic: bool
    max_residual: float
    tangent: Subspace


class CurvatureOperatorSet:
    """D, R, the canonical curvature and the iterated covariant derivatives at o."""

    def __init__(self, space: ReductiveSpace, k_max: int = DEFAULT_ORDER,
                 tol: Optional[Tolerance] = None):
        self.space = space
        self.tol = tol or space.tol
        self.k_max = int(k_max)
        n = space.dim_p
        self.n = n
        d = space.difference_array
        self.D = d
        bp = space.bracket_pp_p
        dd = np.einsum("yzq,xqo->xyzo", d, d)
        kterm = np.einsum("xya,azo->xyzo", space.bracket_pp_k, space.ad_k_on_p)
        self.Rc = -kterm
        self.R = dd - np.transpose(dd, (1, 0, 2, 3)) - kterm - np.einsum("xyq,qzo->xyzo", bp, d)
        self._nabla: List[np.ndarray] = [self.R]
        for _ in range(self.k_max):
            self._nabla.append(derivation(self._nabla[-1], d))

    # --- pointwise tensors --------------------------------------------------

    def difference(self, x, y) -> np.ndarray:
        return contract(self.D, x, y)

    def difference_operator(self, x) -> np.ndarray:
        """Matrix of D_X."""
        return contract(self.D, x).T

    def curvature(self, x, y, z) -> np.ndarray:
        return contract(self.R, x, y, z)

    def canonical_curvature(self, x, y, z) -> np.ndarray:
        return contract(self.Rc, x, y, z)

    def nabla_tensor(self, k: int) -> np.ndarray:
        if k < 0 or k > self.k_max:
            raise OrderError(f"order {k} outside 0..{self.k_max}")
        return self._nabla[k]

    def nabla_k_R(self, k: int, *args) -> np.ndarray:
        """(nabla^k R)(V1, ..., Vk, X, Y) Z for k+3 arguments."""
        t = self.nabla_tensor(k)
        if len(args) != k + 3:
            raise InputError(f"order {k} needs {k + 3} arguments, got {len(args)}")
        return contract(t, *args)

    def sectional(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        den = (x @ x) * (y @ y) - (x @ y) ** 2
        if den <= self.tol.eps_zero:
            raise InputError("sectional curvature needs linearly independent vectors")
        return float(self.curvature(x, y, y) @ x / den)

    def jacobi_operator(self, x) -> np.ndarray:
        """Matrix of Y -> R(Y,X)X."""
        x = np.asarray(x, dtype=float)
        return np.einsum("yabo,a,b->oy", self.R, x, x)

    def cartan_operator(self, j: int, x) -> np.ndarray:
        """Matrix of Y -> (nabla^j R)(X, ..., X, X, Y) X."""
        if j < 1:
            raise OrderError("Cartan operators start at order 1")
        t = self.nabla_tensor(j)
        x = np.asarray(x, dtype=float)
        t = contract(t, *([x] * (j + 1)))  # remaining slots: (Y, Z, out)
        return np.einsum("yzo,z->oy", t, x)

    def ricci(self) -> np.ndarray:
        return np.einsum("xyzx->yz", self.R)

    def einstein_constant(self) -> Tuple[float, float]:
        """Mean Ricci eigenvalue and the deviation from a multiple of the metric."""
        ric = self.ricci()
        lam = float(np.trace(ric) / self.n)
        return lam, float(np.max(np.abs(ric - lam * np.eye(self.n))))

    def curvature_operator(self, v: Subspace) -> np.ndarray:
        """Curvature operator on the exterior square of v (orthonormal pair basis)."""
        b = v.basis
        pairs = list(combinations(range(v.dim), 2))
        rv = restrict(self.R, b) @ b  # <R(bi,bj)bk, bl>
        q = np.empty((len(pairs), len(pairs)))
        for a, (i, j) in enumerate(pairs):
            for c, (k, l) in enumerate(pairs):
                q[a, c] = rv[i, j, l, k]
        return 0.5 * (q + q.T)

    # --- invariance tests ---------------------------------------------------

    def invariance_residual(self, t: np.ndarray, v: Subspace, order: int = 0
                            ) -> Tuple[float, Optional[Witness]]:
        if v.dim == 0:
            return 0.0, None
        vals = restrict(t, v.basis)
        norms = escape_norms(vals, v.projector)
        idx = np.unravel_index(int(np.argmax(norms)), norms.shape)
        res = float(norms[idx])
        return res, Witness(order, tuple(int(i) for i in idx),
                            tuple(float(a) for a in vals[idx]), res)

    def d_residual(self, v: Subspace) -> float:
        return self.invariance_residual(self.D, v)[0]

    def sample_directions(self, v: Subspace, sample_count: int = DEFAULT_SAMPLES,
                          seed: int = 0) -> np.ndarray:
        """Basis vectors, normalized pairwise sums and seeded random unit vectors of v."""
        b = v.basis
        dirs = [b[:, i] for i in range(v.dim)]
        for i, j in combinations(range(v.dim), 2):
            dirs.append((b[:, i] + b[:, j]) / np.sqrt(2.0))
        rng = np.random.default_rng(seed)
        if sample_count > 0 and v.dim > 0:
            c = rng.standard_normal((sample_count, v.dim))
            c /= np.linalg.norm(c, axis=1, keepdims=True)
            dirs.extend(list(c @ b.T))
        return np.array(dirs).reshape(-1, self.n)

    def translate_subspace(self, v: Subspace, x) -> Subspace:
        """The subspace exp(-D_X) v for X in v."""
        x = np.asarray(x, dtype=float)
        res = v.residual_of(x)
        if res >= self.tol.eps_zero:
            raise NotTangentError(f"direction not in subspace (residual {res:.3e})")
        if v.dim == 0:
            return v
        w = mat_exp(-self.difference_operator(x)) @ v.basis
        return orthonormalize(list(w.T), self.tol)

    def tojo_check(self, v: Subspace, sample_count: int = DEFAULT_SAMPLES,
                   seed: int = 0) -> TojoReport:
        worst, worst_x = 0.0, np.zeros(self.n)
        if v.dim == 0:
            return TojoReport(0.0, tuple(worst_x), 0)
        dirs = self.sample_directions(v, sample_count, seed)
        for x in dirs:
            w = self.translate_subspace(v, x)
            res, _ = self.invariance_residual(self.R, w)
            if res > worst:
                worst, worst_x = res, x
        return TojoReport(worst, tuple(float(a) for a in worst_x), len(dirs))

    def tg_check(self, v: Subspace, order: Optional[int] = None,
                 sample_count: int = DEFAULT_SAMPLES, seed: int = 0) -> TGVerdict:
        """Invariance under nabla^k R for k <= order plus the exponential criterion.

        A failing verdict is definitive.  A passing verdict certifies that no
        violation was found at the given order and sample count.
        """
        k = self.k_max if order is None else order
        if k > self.k_max:
            raise OrderError(f"order {k} exceeds cached maximum {self.k_max}")
        eps = self.tol.eps_zero
        residuals = []
        witness = None
        for j in range(k + 1):
            res, wit = self.invariance_residual(self._nabla[j], v, j)
            residuals.append(res)
            if res >= eps and witness is None:
                witness = wit
        tojo = self.tojo_check(v, sample_count, seed)
        d_res = self.d_residual(v)
        max_res = max(residuals) if residuals else 0.0
        ok = max_res < eps and tojo.residual < eps
        return TGVerdict(is_tg=ok, max_residual=max_res, order_checked=k,
                         tojo_residual=tojo.residual, d_invariant=d_res < eps,
                         d_residual=d_res, order_residuals=tuple(residuals),
                         witness=witness, samples=tojo.samples)

    def batch_residuals(self, frames: np.ndarray, order: int = 1,
                        max_entries: int = 1 << 25) -> np.ndarray:
        """Largest invariance residual over orders 0..order for a batch of frames.

        ``frames`` has shape (N, n, d) with orthonormal columns.  Frames are
        processed in blocks so that intermediates stay below ``max_entries``.
        """
        if order > self.k_max:
            raise OrderError(f"order {order} exceeds cached maximum {self.k_max}")
        big = frames.shape[0]
        d = frames.shape[2] if frames.ndim == 3 else 0
        out = np.zeros(big)
        if big == 0 or d == 0:
            return out
        for j in range(order + 1):
            t = self._nabla[j]
            per_frame = d * self.n ** (t.ndim - 1)
            step = max(1, max_entries // per_frame)
            for start in range(0, big, step):
                fb = frames[start:start + step]
                proj = fb @ np.transpose(fb, (0, 2, 1))
                flat = restrict_batch(t, fb).reshape(len(fb), -1, self.n)
                esc = flat - flat @ proj
                res = np.max(np.linalg.norm(esc, axis=2), axis=1)
                out[start:start + step] = np.maximum(out[start:start + step], res)
        return out

    # --- D-invariance -------------------------------------------------------

    def d_invariance_check(self, v: Subspace) -> DInvarianceReport:
        """Compare the three equivalent characterizations of D-invariant TG subspaces.

        (i) v is R- and D-invariant; (ii) v is R^c- and D-invariant;
        (iii) [v,v] + v is a subalgebra equal to [v,v]_k + v.
        """
        eps = self.tol.eps_zero
        d_res = self.d_residual(v)
        r_res = self.invariance_residual(self.R, v)[0]
        rc_res = self.invariance_residual(self.Rc, v)[0]
        sub = self.space.generated_canonical_subalgebra(v)
        c1 = d_res < eps and r_res < eps
        c2 = d_res < eps and rc_res < eps
        c3 = sub.is_subalgebra and sub.splits
        if self.space.is_naturally_reductive()[0] and not (c1 == c2 == c3):
            raise InternalConsistencyError(
                f"characterizations disagree: (i)={c1} (ii)={c2} (iii)={c3}; residuals "
                f"D={d_res:.3e} R={r_res:.3e} Rc={rc_res:.3e} "
                f"closure={sub.closure_residual:.3e} split={sub.split_residual:.3e}")
        return DInvarianceReport(d_invariant=d_res < eps, d_residual=d_res,
                                 r_invariant=r_res < eps, r_residual=r_res,
                                 rc_invariant=rc_res < eps, rc_residual=rc_res,
                                 split_subalgebra=c3, clause_i=c1, clause_ii=c2,
                                 clause_iii=c3)

    # --- surfaces -----------------------------------------------------------

    def cyclic_span(self, x, y) -> Subspace:
        """span{D_X^k Y : k >= 0}, grown until the rank stops increasing."""
        dx = self.difference_operator(x)
        vecs = [np.asarray(y, dtype=float)]
        cur = orthonormalize(vecs, self.tol)
        for _ in range(self.n):
            vecs.append(dx @ vecs[-1])
            nxt = orthonormalize(vecs, self.tol)
            if nxt.dim == cur.dim:
                break
            cur = nxt
        return cur

    def surface_criterion(self, x, y, order: Optional[int] = None) -> SurfaceReport:
        """Test the necessary condition for span{X, Y} to be a TG surface.

        The D_X-cyclic span of Y must sit in one eigenspace of the Jacobi
        operator R_X and in the kernel of every Cartan operator up to ``order``.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        if nx < self.tol.eps_zero or ny < self.tol.eps_zero:
            raise InputError("surface criterion needs nonzero vectors")
        if abs(x @ y) > self.tol.eps_zero * nx * ny:
            raise InputError("surface criterion needs orthogonal vectors")
        k = self.k_max if order is None else order
        w = self.cyclic_span(x, y)
        rx = self.jacobi_operator(x)
        img = rx @ w.basis
        mu = float(np.trace(w.basis.T @ img) / w.dim)
        eig_res = float(np.max(np.linalg.norm(img - mu * w.basis, axis=0)))
        cart = 0.0
        for j in range(1, k + 1):
            cart = max(cart, float(np.max(np.linalg.norm(self.cartan_operator(j, x) @ w.basis,
                                                         axis=0))))
        eps = self.tol.eps_zero
        passes = eig_res < eps and cart < eps
        kappa = mu / (nx * nx) if eig_res < eps else None
        return SurfaceReport(passes, kappa, eig_res, cart, w)

    # --- orbits -------------------------------------------------------------

    def orbit_second_fundamental_form(self, s: Subspace, x_adapted, y_p) -> np.ndarray:
        """Normal part of [X_k, Y] + D_{X_p} Y for X in s and Y tangent to the orbit."""
        tangent = self._orbit_tangent(s)
        return self._orbit_sff(tangent, np.asarray(x_adapted, float), np.asarray(y_p, float))

    def _orbit_tangent(self, s: Subspace) -> Subspace:
        res = self.space.closure_residual(s)
        if res >= self.tol.eps_zero:
            raise NotASubalgebraError(f"subspace not closed under bracket (residual {res:.3e})")
        return span_columns(s.basis[:self.n], self.tol)

    def _orbit_sff(self, tangent: Subspace, x, y) -> np.ndarray:
        n = self.n
        xk = x[n:]
        val = self.space.ad_k(xk) @ y + self.difference(x[:n], y)
        return val - tangent.projector @ val

    def orbit_is_totally_geodesic(self, s: Subspace) -> OrbitReport:
        tangent = self._orbit_tangent(s)
        worst = 0.0
        for x in s.basis.T:
            for y in tangent.basis.T:
                worst = max(worst, float(np.linalg.norm(self._orbit_sff(tangent, x, y))))
        return OrbitReport(worst < self.tol.eps_zero, worst, tangent)

    # --- fibrations ---------------------------------------------------------

    def well_positioned_check(self, v: Subspace, sample_count: int = DEFAULT_SAMPLES,
                              seed: int = 0) -> WellPositionedReport:
        """Whether exp(-D_X) v splits along the vertical/horizontal decomposition.

        For a D-invariant v only X = 0 is examined.
        """
        fib = self.space.fibration
        if fib is None:
            raise MissingFibrationError(f"space '{self.space.name}' has no fibration data")
        pv = fib[0].projector
        eps = self.tol.eps_zero

        def split_defect(w: Subspace) -> float:
            comm = w.projector @ pv - pv @ w.projector
            return float(np.max(np.abs(comm), initial=0.0))

        worst = split_defect(v)
        worst_x = np.zeros(self.n)
        if v.dim and self.d_residual(v) >= eps:
            for x in self.sample_directions(v, sample_count, seed):
                res = split_defect(self.translate_subspace(v, x))
                if res > worst:
                    worst, worst_x = res, x
        sv = np.linalg.svd(fib[0].basis.T @ v.basis, compute_uv=False) if v.dim else []
        vert = int(np.sum(np.asarray(sv) > 1 - self.tol.eps_cluster))
        sh = np.linalg.svd(fib[1].basis.T @ v.basis, compute_uv=False) if v.dim else []
        hor = int(np.sum(np.asarray(sh) > 1 - self.tol.eps_cluster))
        return WellPositionedReport(worst < eps, worst, tuple(float(a) for a in worst_x),
                                    vert, hor)
