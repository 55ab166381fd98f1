"""Riemannian cones dr^2 + r^2 g over a homogeneous base.

Cone tangent vectors at (tau, o) are pairs (a, v): ``a`` is the radial
component and ``v`` a base vector in p-coordinates.  Arrays for tensor
checks use index 0 for the radial direction and are taken at tau = 1,
where the coordinates are orthonormal; the dilations r -> lambda r are
homotheties, so every invariance statement transfers to other tau.

Higher covariant derivatives at (1, o).  Let nabla~ be the product of the
flat radial connection with the canonical connection of the base.  Every
tensor T built from the cone curvature is invariant under the base
isometries and under dilations; the first gives nabla~_x T = 0 for base x,
the second gives nabla~_{d_r} T = P T with

    (P T)(Y1..Ym) = dr(T(Y1..Ym)) d_r - sum_i T(.., dr(Yi) d_r, ..).

The Levi-Civita connection differs from nabla~ by the tensor Dh with
Dh_{d_r} d_r = 0, Dh_{d_r} y = Dh_y d_r = y and Dh_x y = D_x y - <x,y> d_r,
so nabla T = a P T + Dh-derivation of T for a direction a d_r + x.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import qmc

from .errors import UnsupportedBaseError, ZeroVelocityError
from .homgeo import (CurvatureOperatorSet, TGVerdict, Witness, derivation, escape_norms,
                     restrict, restrict_batch)
from .liealg import ReductiveSpace
from .numkernel import DEFAULT_TOL, Subspace, Tolerance, orthonormalize

DEFAULT_CONE_ORDER = 2


@dataclass(frozen=True)
class ConePoint:
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("cone points need tau > 0")


@dataclass(frozen=True)
class ConeTangent:
    a: float
    v: Tuple[float, ...]

    def norm2(self, tau: float) -> float:
        v = np.asarray(self.v, dtype=float)
        return self.a ** 2 + tau ** 2 * float(v @ v)

    def as_array(self) -> np.ndarray:
        return np.concatenate([[self.a], np.asarray(self.v, dtype=float)])


def _base_curvature_hat(curv: CurvatureOperatorSet) -> np.ndarray:
    """R(u,v)w - <v,w>u + <u,w>v on base vectors."""
    n = curv.n
    eye = np.eye(n)
    return (curv.R - np.einsum("yz,xo->xyzo", eye, eye)
            + np.einsum("xz,yo->xyzo", eye, eye))


class ConeGeometry:
    """Curvature of the cone over a base and its covariant derivatives at (1, o)."""

    def __init__(self, curv: CurvatureOperatorSet, k_max: int = DEFAULT_CONE_ORDER,
                 tol: Optional[Tolerance] = None):
        self.curv = curv
        self.tol = tol or curv.tol
        self.k_max = k_max
        n = curv.n
        self.n = n
        m = n + 1
        self.base_hat = _base_curvature_hat(curv)
        rh = np.zeros((m,) * 4)
        rh[1:, 1:, 1:, 1:] = self.base_hat
        self.R = rh
        dh = np.zeros((m,) * 3)
        dh[1:, 1:, 1:] = curv.D
        dh[1:, 1:, 0] = -np.eye(n)
        dh[0, 1:, 1:] = np.eye(n)
        dh[1:, 0, 1:] = np.eye(n)
        self.Dh = dh
        self._tensors = [rh]
        for _ in range(k_max):
            self._tensors.append(self._nabla(self._tensors[-1]))

    def _radial_weight(self, t: np.ndarray) -> np.ndarray:
        """P T: radial output kept, minus the sum over radial input slots."""
        out = np.zeros_like(t)
        out[..., 0] = t[..., 0]
        m = t.ndim - 1
        for s in range(m):
            idx = [slice(None)] * t.ndim
            idx[s] = 0
            sub = np.zeros_like(t)
            sub[tuple(idx)] = t[tuple(idx)]
            out -= sub
        return out

    def _nabla(self, t: np.ndarray) -> np.ndarray:
        out = derivation(t, self.Dh)
        out[0] += self._radial_weight(t)
        return out

    def tensor(self, k: int) -> np.ndarray:
        return self._tensors[k]

    # --- formulas at general tau -------------------------------------------

    def curvature(self, u: ConeTangent, v: ConeTangent, w: ConeTangent) -> ConeTangent:
        """Cone curvature; radial components of the arguments do not contribute."""
        val = np.einsum("xyzo,x,y,z->o", self.base_hat, np.asarray(u.v), np.asarray(v.v),
                        np.asarray(w.v))
        return ConeTangent(0.0, tuple(float(a) for a in val))

    def nabla_R(self, x, u, v, w, at: ConePoint) -> ConeTangent:
        """(nabla_x Rh)(u, v, w) for base vectors: base nabla R minus <x, Rh(u,v)w> tau d_r."""
        x, u, v, w = (np.asarray(a, dtype=float) for a in (x, u, v, w))
        base = self.curv.nabla_k_R(1, x, u, v, w)
        rad = -float(x @ np.einsum("xyzo,x,y,z->o", self.base_hat, u, v, w)) * at.tau
        return ConeTangent(rad, tuple(float(a) for a in base))

    # --- invariance ---------------------------------------------------------

    def invariance(self, basis: np.ndarray, order: Optional[int] = None
                   ) -> Tuple[float, Tuple[float, ...], Optional[Witness]]:
        k = self.k_max if order is None else order
        sub = Subspace(basis)
        residuals, witness = [], None
        for j in range(k + 1):
            vals = restrict(self._tensors[j], sub.basis)
            norms = escape_norms(vals, sub.projector)
            idx = np.unravel_index(int(np.argmax(norms)), norms.shape)
            res = float(norms[idx])
            residuals.append(res)
            if res >= self.tol.eps_zero and witness is None:
                witness = Witness(j, tuple(int(i) for i in idx),
                                  tuple(float(a) for a in vals[idx]), res)
        return max(residuals), tuple(residuals), witness

    def cone_tg_check(self, v_base: Subspace, include_radial: bool = True,
                      order: Optional[int] = None) -> TGVerdict:
        """Invariance of R-dr + v (or of v alone) under the cone tensors up to ``order``."""
        cols = [np.concatenate([[0.0], c]) for c in v_base.basis.T]
        if include_radial:
            cols.insert(0, np.eye(self.n + 1)[0])
        basis = np.column_stack(cols) if cols else np.zeros((self.n + 1, 0))
        k = self.k_max if order is None else order
        if basis.shape[1] == 0:
            return TGVerdict(True, 0.0, k, 0.0, True, 0.0, (0.0,) * (k + 1))
        res, per, wit = self.invariance(basis, k)
        ok = res < self.tol.eps_zero
        return TGVerdict(is_tg=ok, max_residual=res, order_checked=k, tojo_residual=0.0,
                         d_invariant=False, d_residual=float("nan"), order_residuals=per,
                         witness=wit, samples=0)

    # --- hypersurfaces ------------------------------------------------------

    def obstruction_residual(self, etas: np.ndarray) -> np.ndarray:
        """max over basis pairs of |Rh(eta,e_i)e_j + Rh(eta,e_j)e_i| for each eta."""
        t = np.einsum("ex,xyzo->eyzo", etas, self.base_hat)
        sym = t + np.transpose(t, (0, 2, 1, 3))
        return np.max(np.linalg.norm(sym, axis=3), axis=(1, 2))

    def hyperplane_residual(self, etas: np.ndarray, order: Optional[int] = None,
                            chunk: int = 64) -> np.ndarray:
        """Largest normal component of the cone tensors on (d_r + eta)^perp."""
        k = self.k_max if order is None else order
        m = self.n + 1
        normals = np.hstack([np.ones((len(etas), 1)), etas])
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        out = np.zeros(len(etas))
        for start in range(0, len(etas), chunk):
            nb = normals[start:start + chunk]
            frames = _hyperplane_frames(nb)
            best = np.zeros(len(nb))
            for j in range(k + 1):
                t = self._tensors[j]
                # contract the value slot with the normal first, then restrict
                forms = np.tensordot(nb, t, axes=([1], [t.ndim - 1]))  # (N, m, ..., m)
                vals = _restrict_forms(forms, frames)
                best = np.maximum(best, np.max(np.abs(vals.reshape(len(nb), -1)), axis=1))
            out[start:start + chunk] = best
        return out


def _hyperplane_frames(normals: np.ndarray) -> np.ndarray:
    """Orthonormal frames of the orthogonal complements of unit normals."""
    big, m = normals.shape
    frames = np.empty((big, m, m - 1))
    for i, nv in enumerate(normals):
        q, _ = np.linalg.qr(np.column_stack([nv, np.eye(m)]))
        frames[i] = q[:, 1:m]
    return frames


def _restrict_forms(forms: np.ndarray, frames: np.ndarray) -> np.ndarray:
    """Restrict a batch of multilinear forms (N, m, ..., m) to per-sample frames."""
    out = forms
    for _ in range(forms.ndim - 1):
        # contract the leading slot and append the restricted one at the end
        out = np.einsum("nm...,nmd->n...d", out, frames)
    return out


def cone_curvature(curv: CurvatureOperatorSet, u: ConeTangent, v: ConeTangent,
                   w: ConeTangent, at: ConePoint) -> ConeTangent:
    """Cone curvature at ``at``; it does not depend on tau in these coordinates."""
    return cone_geometry(curv, 0).curvature(u, v, w)


def cone_nabla_R(curv: CurvatureOperatorSet, x, u, v, w, at: ConePoint) -> ConeTangent:
    return cone_geometry(curv, 0).nabla_R(x, u, v, w, at)


def cone_ricci(cone: ConeGeometry) -> np.ndarray:
    """Ricci tensor of the cone at (1, o) in the coordinates (d_r, p)."""
    return np.einsum("xyzx->yz", cone.R)


def rescaled_base(space: ReductiveSpace, factor: float, k_max: int = 1) -> CurvatureOperatorSet:
    """Curvature data of the same decomposition with the metric on p scaled by ``factor``."""
    scaled = ReductiveSpace(space.algebra, space.k_basis, space.p_basis,
                            p_metric=factor * np.eye(space.dim_p), name=f"{space.name}*{factor:g}",
                            tol=space.tol)
    return CurvatureOperatorSet(scaled, k_max=k_max)


# --- scans ------------------------------------------------------------------

def sphere_points(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Quasi-uniform points on the unit sphere of R^dim.

    Uses a Fibonacci lattice on S^2 and scrambled Sobol points pushed through
    the Gaussian quantile function in higher dimensions.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if dim == 3:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        phi = np.pi * (1 + 5 ** 0.5) * i
        rad = np.sqrt(1 - z * z)
        return np.column_stack([rad * np.cos(phi), rad * np.sin(phi), z])
    from scipy.stats import norm
    m = max(int(np.ceil(np.log2(count))), 1)
    sob = qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)[:count]
    g = norm.ppf(np.clip(sob, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


DEFAULT_RADII = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class ScanReport:
    min_residual: float
    argmin_eta: Tuple[float, ...]
    samples: int
    passing: int
    radii: Tuple[float, ...]
    points_per_sphere: int
    order: int
    note: str = ("scan evidence at finite resolution; a positive minimum is falsification "
                 "evidence against non-radial totally geodesic hyperplanes, not a proof")

    @property
    def families_found(self) -> bool:
        return self.passing > 0


def hypersurface_obstruction_scan(curv: CurvatureOperatorSet, radii: Sequence[float] = DEFAULT_RADII,
                                  points_per_sphere: int = 2000, order: int = DEFAULT_CONE_ORDER,
                                  extra_directions: Sequence[np.ndarray] = (), seed: int = 0,
                                  tol: Optional[Tolerance] = None) -> ScanReport:
    """Search for tilted hyperplanes (d_r + eta)^perp that could be totally geodesic."""
    tol = tol or curv.tol
    cone = cone_geometry(curv, order)
    n = curv.n
    dirs = sphere_points(n, points_per_sphere, seed)
    specials = [np.eye(n)[i] for i in range(n)] + [-np.eye(n)[i] for i in range(n)]
    for d in extra_directions:
        d = np.asarray(d, dtype=float)
        specials += [d / np.linalg.norm(d), -d / np.linalg.norm(d)]
    dirs = np.vstack([dirs, np.array(specials)])
    etas = [np.zeros((1, n))]
    for r in radii:
        if r > 0:
            etas.append(r * dirs)
    etas = np.vstack(etas)
    res1 = cone.obstruction_residual(etas)
    res2 = cone.hyperplane_residual(etas, order)
    score = np.maximum(res1, res2)
    i = int(np.argmin(score))
    return ScanReport(float(score[i]), tuple(float(a) for a in etas[i]), len(etas),
                      int(np.sum(score < tol.eps_zero)), tuple(float(r) for r in radii),
                      points_per_sphere, order)


_CONE_CACHE = {}


def cone_geometry(curv: CurvatureOperatorSet, order: int = DEFAULT_CONE_ORDER) -> ConeGeometry:
    key = (id(curv), order)
    if key not in _CONE_CACHE:
        _CONE_CACHE[key] = (curv, ConeGeometry(curv, order))
    return _CONE_CACHE[key][1]


def constant_curvature_cone_classification(kappa: float, n: int = 3,
                                           points_per_sphere: int = 400,
                                           tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether the cone over the sphere of curvature kappa has tilted TG hyperplanes."""
    from .modelspaces import build_round_sphere
    if kappa <= 0:
        raise UnsupportedBaseError("only spheres of positive curvature are supported")
    bundle = build_round_sphere(n, float(1.0 / np.sqrt(kappa)))
    rep = hypersurface_obstruction_scan(bundle.curv, points_per_sphere=points_per_sphere, tol=tol)
    return rep.min_residual < tol.eps_zero


# --- dichotomy --------------------------------------------------------------

@dataclass(frozen=True)
class Dichotomy:
    radial_tangent: bool
    projected: Subspace


def cone_subspace_dichotomy(v: Subspace, tol: Tolerance = DEFAULT_TOL) -> Dichotomy:
    """Whether d_r is tangent, and the projection of the subspace to the base."""
    m = v.ambient_dim
    e0 = np.eye(m)[0]
    radial = v.contains_vector(e0, tol)
    proj = orthonormalize(list(v.basis[1:].T), tol, allow_empty=True) if v.dim else Subspace.zero(m - 1)
    if radial:
        rebuilt = orthonormalize([e0] + [np.concatenate([[0.0], c]) for c in proj.basis.T], tol)
        assert rebuilt.dim == v.dim, "radial branch must split off the radial line"
    return Dichotomy(radial, proj)


# --- geodesics --------------------------------------------------------------

@dataclass(frozen=True)
class ConeGeodesic:
    """gamma(t) = (rho(t), exp_p(f(t) v)) through (tau, p) with velocity a d_r + v."""

    tau: float
    a: float
    speed: float  # |v| in the base metric

    def rho(self, t):
        t = np.asarray(t, dtype=float)
        return np.sqrt((self.a * t + self.tau) ** 2 + self.speed ** 2 * self.tau ** 2 * t ** 2)

    def f(self, t):
        t = np.asarray(t, dtype=float)
        if self.speed == 0:
            return np.zeros_like(t)
        return np.arctan2(self.speed * self.tau * t, self.a * t + self.tau) / self.speed

    def arc(self, t):
        """Base arclength f(t) |v| travelled along the geodesic of the link."""
        return self.f(t) * self.speed

    def rho_prime(self, t):
        t = np.asarray(t, dtype=float)
        return ((self.a * t + self.tau) * self.a + self.speed ** 2 * self.tau ** 2 * t) / self.rho(t)

    @property
    def interval(self) -> Tuple[float, float]:
        if self.speed > 0 or self.a == 0:
            return (-np.inf, np.inf)
        if self.a > 0:
            return (-self.tau / self.a, np.inf)
        return (-np.inf, -self.tau / self.a)


def cone_geodesic(tau: float, a: float, v: Sequence[float]) -> ConeGeodesic:
    v = np.asarray(v, dtype=float)
    speed = float(np.linalg.norm(v))
    if a == 0 and speed == 0:
        raise ZeroVelocityError("initial velocity is zero")
    ConePoint(tau)
    return ConeGeodesic(float(tau), float(a), speed)


def integrate_cone_geodesic(tau: float, a: float, speed: float, t_end: float,
                            n_points: int = 101) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate r'' = r s'^2, s'' = -2 r' s' / r numerically.

    The cone over a base geodesic is a totally geodesic flat surface, so
    (r, s) with s the base arclength describes every cone geodesic.
    Returns (t, r, s).
    """
    def rhs(_, y):
        r, dr, _s, ds = y
        return [dr, r * ds * ds, ds, -2.0 * dr * ds / r]

    ts = np.linspace(0.0, t_end, n_points)
    sol = solve_ivp(rhs, (0.0, t_end), [tau, a, 0.0, speed], method="RK45", t_eval=ts,
                    rtol=1e-12, atol=1e-12)
    return sol.t, sol.y[0], sol.y[2]


# --- warped product fixture ---------------------------------------------------

def warped_example_second_fundamental_form(point: Sequence[float], p, q,
                                           h: float = 1e-4) -> np.ndarray:
    """Second fundamental form of {(1/cos x, x, y, z)} in the cone over
    dx^2 + sin(x)^2 p^2 dy^2 + sin(x)^2 q^2 dz^2, via finite differences.

    Returns the 3 x 3 matrix of II against the unit normal at (x, y, z).
    """
    def metric(c):
        r, x, y, z = c
        s = np.sin(x)
        return np.diag([1.0, r * r, (r * s * p(y, z)) ** 2, (r * s * q(y, z)) ** 2])

    def christoffel(c):
        g = metric(c)
        ginv = np.linalg.inv(g)
        dg = np.empty((4, 4, 4))  # dg[k] = d g / d c_k
        for k in range(4):
            e = np.zeros(4)
            e[k] = h
            dg[k] = (metric(c + e) - metric(c - e)) / (2 * h)
        # Gamma^l_ij = 1/2 g^lm (d_i g_mj + d_j g_mi - d_m g_ij)
        t = np.einsum("imj->mij", dg) + np.einsum("jmi->mij", dg) - dg
        return 0.5 * np.einsum("lm,mij->lij", ginv, t)

    def embed(u):
        x, y, z = u
        return np.array([1.0 / np.cos(x), x, y, z])

    u = np.asarray(point, dtype=float)
    c = embed(u)
    jac = np.empty((4, 3))
    hess = np.empty((4, 3, 3))
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        jac[:, i] = (embed(u + e) - embed(u - e)) / (2 * h)
        for j in range(3):
            f = np.zeros(3)
            f[j] = h
            hess[:, i, j] = (embed(u + e + f) - embed(u + e - f) - embed(u - e + f)
                             + embed(u - e - f)) / (4 * h * h)
    g = metric(c)
    # unit normal: g-orthogonal to the image of the Jacobian
    ns = np.linalg.svd((g @ jac).T)[2][-1]
    ns /= np.sqrt(ns @ g @ ns)
    gam = christoffel(c)
    acc = hess + np.einsum("lij,ia,jb->lab", gam, jac, jac)
    return np.einsum("l,lk,kab->ab", ns, g, acc)
