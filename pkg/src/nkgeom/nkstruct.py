"""Order-three automorphisms, the induced almost complex structure, and Kähler angles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import NotThreeSymmetricError
from .homgeo import CurvatureOperatorSet
from .liealg import ReductiveSpace
from .numkernel import DEFAULT_TOL, Subspace, Tolerance

HOLOMORPHIC = "holomorphic"
LAGRANGIAN = "lagrangian"
TOTALLY_REAL = "totally_real"
MIXED = "mixed"


@dataclass(frozen=True, eq=False)
class NKStructure:
    """theta restricted to p and J = (2 theta + Id) / sqrt(3)."""

    space: ReductiveSpace
    theta: np.ndarray
    J: np.ndarray


def build_J(space: ReductiveSpace, theta: np.ndarray,
            tol: Tolerance = DEFAULT_TOL) -> NKStructure:
    """Validate an order-three isometry of p and build the almost complex structure."""
    n = space.dim_p
    th = np.asarray(theta, dtype=float)
    if th.shape != (n, n):
        raise NotThreeSymmetricError(f"theta must be {n} x {n}, got {th.shape}")
    eye = np.eye(n)
    orth = float(np.max(np.abs(th.T @ th - eye)))
    if orth >= tol.eps_zero:
        raise NotThreeSymmetricError(f"theta is not orthogonal (defect {orth:.3e})")
    cube = float(np.max(np.abs(th @ th @ th - eye)))
    if cube >= tol.eps_zero:
        raise NotThreeSymmetricError(f"theta^3 differs from the identity (defect {cube:.3e})")
    smin = float(np.min(np.linalg.svd(th - eye, compute_uv=False)))
    if smin < tol.eps_zero:
        raise NotThreeSymmetricError("theta fixes a nonzero vector of p")
    j = (2.0 * th + eye) / np.sqrt(3.0)
    sq = float(np.max(np.abs(j @ j + eye)))
    if sq >= tol.eps_zero:
        raise NotThreeSymmetricError(f"J^2 + Id does not vanish (defect {sq:.3e})")
    for a in range(space.dim_k):
        ad = space.ad_k_on_p[a].T
        com = float(np.max(np.abs(ad @ j - j @ ad)))
        if com >= tol.eps_zero:
            raise NotThreeSymmetricError(f"J does not commute with the isotropy action "
                                         f"(defect {com:.3e})")
    th = th.copy()
    j.setflags(write=False)
    th.setflags(write=False)
    return NKStructure(space, th, j)


def nabla_J(curv: CurvatureOperatorSet, nk: NKStructure) -> np.ndarray:
    """Array ``t[x, y, o]`` of (nabla_X J) Y = D_X(JY) - J(D_X Y)."""
    d = curv.D
    j = nk.J
    return np.einsum("xqo,qy->xyo", d, j) - np.einsum("oq,xyq->xyo", j, d)


@dataclass(frozen=True)
class NKResidual:
    residual: float
    strictness: float
    antisymmetry: float


def nearly_kahler_residual(curv: CurvatureOperatorSet, nk: NKStructure) -> NKResidual:
    """Defect of (nabla_X J) X = 0 and the size of nabla J.

    ``residual`` is the largest entry of the part of nabla J symmetric in
    (X, Y), which vanishes exactly when (nabla_X J) X = 0 for every X.
    ``antisymmetry`` measures failure of full skew-symmetry of
    <(nabla_X J) Y, Z>.
    """
    t = nabla_J(curv, nk)
    sym = t + np.transpose(t, (1, 0, 2))
    res = float(np.max(np.linalg.norm(sym, axis=2)))
    strict = float(np.max(np.linalg.norm(t, axis=2)))
    anti = max(float(np.max(np.abs(t + np.transpose(t, (0, 2, 1))))),
               float(np.max(np.abs(t + np.transpose(t, (2, 1, 0))))))
    return NKResidual(res, strict, anti)


@dataclass(frozen=True)
class KahlerAngle:
    constant: bool
    angle: float | None
    cos2_spectrum: Tuple[float, ...]

    @property
    def min_angle(self) -> float:
        return float(np.arccos(np.sqrt(np.clip(max(self.cos2_spectrum, default=0.0), 0, 1))))

    @property
    def max_angle(self) -> float:
        return float(np.arccos(np.sqrt(np.clip(min(self.cos2_spectrum, default=0.0), 0, 1))))


def kahler_angle(v: Subspace, nk: NKStructure, tol: Tolerance = DEFAULT_TOL) -> KahlerAngle:
    """Kähler angle of v, if constant.

    The compression A = B^T J B of J to v satisfies |P_v J x|^2 = x^T A^T A x,
    so the angle is constant exactly when A^T A is scalar.  The angle itself
    is taken from the singular values of the tangent and normal parts of JB,
    which keeps full precision at both ends of [0, pi/2].
    """
    if v.dim == 0:
        return KahlerAngle(True, float(np.pi / 2), ())
    jb = nk.J @ v.basis
    a = v.basis.T @ jb
    w = np.clip(np.linalg.eigvalsh(a.T @ a), 0.0, 1.0)
    spread = float(w[-1] - w[0])
    constant = spread < tol.eps_cluster
    angle = None
    if constant:
        cos = float(np.mean(np.linalg.svd(a, compute_uv=False)))
        sin = float(np.mean(np.linalg.svd(jb - v.projector @ jb, compute_uv=False)[:v.dim]))
        angle = float(np.arctan2(sin, cos))
    return KahlerAngle(constant, angle, tuple(float(x) for x in w))


def classify_J_type(v: Subspace, nk: NKStructure, tol: Tolerance = DEFAULT_TOL) -> str:
    """One of holomorphic, lagrangian, totally_real, mixed."""
    jb = nk.J @ v.basis
    if v.dim and float(np.max(np.linalg.norm(jb - v.projector @ jb, axis=0))) < tol.eps_zero:
        return HOLOMORPHIC
    a = v.basis.T @ jb
    if float(np.max(np.abs(a), initial=0.0)) < tol.eps_zero:
        return LAGRANGIAN if 2 * v.dim == v.ambient_dim else TOTALLY_REAL
    return MIXED
