"""Concrete matrix models of the homogeneous nearly Kähler 6-manifolds and of spheres.

Each builder writes down the basis of the complement p as explicit
matrices, completes it with a basis of the isotropy algebra, extracts
structure constants numerically and validates the result.  The g-basis is
always ordered (p-basis, k-basis), so p-coordinates coincide with the
coefficients in e1, ..., e6.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import NotAbelianError, NotBergerError, SpaceDefinitionError, UnknownSpaceError
from .homgeo import CurvatureOperatorSet, DEFAULT_ORDER
from .liealg import (LieAlgebraData, ReductiveSpace, coordinates_in, gram_from_matrices,
                     structure_from_matrices)
from .nkstruct import HOLOMORPHIC, LAGRANGIAN, TOTALLY_REAL, NKStructure, build_J
from .numkernel import DEFAULT_TOL, Subspace, Tolerance, mat_exp, orthonormalize

NK_SPACES = ("cp3", "flag", "s3s3")

SQ2, SQ3 = np.sqrt(2.0), np.sqrt(3.0)


# --- matrix helpers ---------------------------------------------------------

def unit(n: int, i: int, j: int) -> np.ndarray:
    """Matrix unit E_ij (1-based indices)."""
    m = np.zeros((n, n), dtype=complex)
    m[i - 1, j - 1] = 1.0
    return m


# quaternions as 2x2 complex matrices, q = a + j b -> [[a, -conj(b)], [b, conj(a)]]
Q1 = np.eye(2, dtype=complex)
QI = np.diag([1j, -1j])
QJ = np.array([[0, -1], [1, 0]], dtype=complex)
QK = QI @ QJ


def quat_unit(q: np.ndarray, i: int, j: int) -> np.ndarray:
    """Quaternionic 2x2 matrix q E_ij realized as a complex 4x4 matrix."""
    e = np.zeros((2, 2))
    e[i - 1, j - 1] = 1.0
    return np.kron(e, q)


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    return scipy.linalg.block_diag(*blocks).astype(complex)


def neg_real_trace(x: np.ndarray, y: np.ndarray) -> float:
    return float(-np.real(np.trace(x @ y)))


# --- bundle -----------------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    """Tangent subspace of a known totally geodesic submanifold and its expected data."""

    label: str
    subspace: Subspace
    j_type: Optional[str] = None
    well_positioned: Optional[bool] = None
    sec: Optional[float] = None
    berger: Optional[Tuple[float, float]] = None
    maximal: bool = True
    d_invariant: Optional[bool] = None
    lattice: Optional[Tuple[Tuple[float, float], ...]] = None
    family: bool = False
    description: str = ""


@dataclass(eq=False)
class ModelSpaceBundle:
    name: str
    space: ReductiveSpace
    curv: CurvatureOperatorSet
    nk: Optional[NKStructure]
    candidates: List[Candidate]
    isotropy_sample: List[np.ndarray]
    congruences: List[np.ndarray]
    matrices: List[np.ndarray]
    k_matrices: List[np.ndarray]
    metadata: Dict[str, object] = field(default_factory=dict)

    def to_definition(self) -> dict:
        extra = {}
        if self.nk is not None:
            extra["theta"] = self.nk.theta.tolist()
        return self.space.to_definition(extra)

    def candidate(self, label: str) -> Candidate:
        for c in self.candidates:
            if c.label == label:
                return c
        raise KeyError(label)

    def p_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix realizing the element of p with the given p-coordinates."""
        return sum(float(c) * m for c, m in zip(x, self.matrices))


def _algebra(mats: Sequence[np.ndarray], form, tol: Tolerance,
             bi_invariant: bool = True) -> LieAlgebraData:
    c = structure_from_matrices(mats, tol)
    g = gram_from_matrices(mats, form)
    return LieAlgebraData(c, g, bi_invariant=bi_invariant, tol=tol)


def _induced_on_p(p_mats: Sequence[np.ndarray], all_mats: Sequence[np.ndarray],
                  op: Callable[[np.ndarray], np.ndarray], dim_p: int,
                  tol: Tolerance) -> np.ndarray:
    """Matrix on p of a linear map of matrices that preserves p."""
    out = np.zeros((dim_p, dim_p))
    for j, m in enumerate(p_mats):
        coef = coordinates_in(all_mats, op(m), tol)
        if np.max(np.abs(coef[dim_p:])) >= tol.eps_zero:
            raise SpaceDefinitionError("map does not preserve p")
        out[:, j] = coef[:dim_p]
    return out


def _isotropy_sample(space: ReductiveSpace, outer: Sequence[np.ndarray],
                     seed: int = 0, count: int = 6) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    ops = []
    for a in range(space.dim_k):
        w = np.zeros(space.dim_k)
        w[a] = 1.0
        ops.append(mat_exp(0.7 * space.ad_k(w)))
    for _ in range(count):
        w = rng.standard_normal(space.dim_k)
        ops.append(mat_exp(space.ad_k(w)))
    ops.extend(np.asarray(m, dtype=float) for m in outer)
    return ops


def _finish(name, mats, k_mats, alg, labels, fibration, theta_op, outer_ops, congruence_ops,
            candidates_fn, tol, k_max, metadata, require_nr: bool = True) -> ModelSpaceBundle:
    n_p = len(mats)
    all_mats = list(mats) + list(k_mats)
    dim = len(all_mats)
    eye = np.eye(dim)
    outer = [_induced_on_p(mats, all_mats, op, n_p, tol) for op in outer_ops]
    space = ReductiveSpace(alg, eye[:, n_p:], eye[:, :n_p], name=name, labels=labels,
                           fibration=fibration, outer_isometries=outer, tol=tol)
    nk = None
    if theta_op is not None:
        theta = _induced_on_p(mats, all_mats, theta_op, n_p, tol)
        nk = build_J(space, theta, tol)
    congr = outer + [_induced_on_p(mats, all_mats, op, n_p, tol) for op in congruence_ops]
    curv = CurvatureOperatorSet(space, k_max=k_max, tol=tol)
    ok, res = space.is_naturally_reductive()
    if require_nr and not ok:
        raise SpaceDefinitionError(f"{name}: decomposition is not naturally reductive "
                                   f"(residual {res:.3e})")
    bundle = ModelSpaceBundle(name=name, space=space, curv=curv, nk=nk, candidates=[],
                              isotropy_sample=_isotropy_sample(space, outer),
                              congruences=congr, matrices=list(mats), k_matrices=list(k_mats),
                              metadata=metadata)
    if candidates_fn is not None:
        bundle.candidates = candidates_fn(n_p)
    return bundle


def _sub(*vectors) -> Subspace:
    return orthonormalize([np.asarray(v, dtype=float) for v in vectors])


def _e(n: int, *coeffs: Tuple[int, float]) -> np.ndarray:
    """Vector sum c * e_i from (i, c) pairs with 1-based i."""
    v = np.zeros(n)
    for i, c in coeffs:
        v[i - 1] += c
    return v


# --- complex projective space -----------------------------------------------

def _cp3_candidates(n: int) -> List[Candidate]:
    e = lambda *c: _e(n, *c)
    return [
        Candidate("rp3", _sub(e((1, 1)), e((3, 1)), e((5, 1))), LAGRANGIAN, True,
                  berger=(2.0, 0.5), description="Berger projective space RP^3 (r=2, tau=1/2)"),
        Candidate("fiber", _sub(e((1, 1)), e((2, 1))), HOLOMORPHIC, True, sec=2.0,
                  description="twistor fiber S^2(1/sqrt2)"),
        Candidate("su2_sphere", _sub(e((3, 1)), e((4, 1))), HOLOMORPHIC, True, sec=1.0,
                  description="sphere S^2(1) through su(2)"),
        Candidate("lambda3_sphere", _sub(e((1, SQ2), (3, SQ3)), e((2, SQ2), (4, SQ3))),
                  HOLOMORPHIC, False, sec=0.2,
                  description="sphere S^2(sqrt5) from the irreducible 4-dim representation"),
    ]


@lru_cache(maxsize=None)
def build_cp3(k_max: int = DEFAULT_ORDER, tol: Tolerance = DEFAULT_TOL) -> ModelSpaceBundle:
    """CP^3 = Sp(2)/U(1)Sp(1) with metric -2 Re tr_H(XY)."""
    e = [QJ / SQ2, QK / SQ2]
    mats = [quat_unit(q, 1, 1) for q in e]
    mats.append(0.5 * (quat_unit(Q1, 2, 1) - quat_unit(Q1, 1, 2)))
    for q in (QI, QJ, QK):
        mats.append(0.5 * (quat_unit(q, 1, 2) + quat_unit(q, 2, 1)))
    k_mats = [quat_unit(QI, 1, 1), quat_unit(QI, 2, 2), quat_unit(QJ, 2, 2),
              quat_unit(QK, 2, 2)]
    # for quaternionic matrices -2 Re tr_H equals -Re tr_C of the complex form
    alg = _algebra(mats + k_mats, neg_real_trace, tol)
    w = np.exp(2j * np.pi / 3)
    g0 = quat_unit(w.real * Q1 + w.imag * QI, 1, 1) + quat_unit(Q1, 2, 2)
    theta = lambda x: g0 @ x @ np.linalg.inv(g0)
    h = quat_unit(QJ, 1, 1) + quat_unit(Q1, 2, 2)
    outer = [lambda x: h @ x @ np.linalg.inv(h)]
    return _finish("cp3", mats, k_mats, alg, None, ([0, 1], [2, 3, 4, 5]), theta, outer, [],
                   _cp3_candidates, tol, k_max,
                   {"killing_factor": 12, "einstein": 2.5, "einstein_rescale": 0.5})


def lambda3_matrices() -> List[np.ndarray]:
    """Images of H, E, F under the irreducible embedding su(2) -> sp(2)."""
    hh = quat_unit(QI, 1, 1) + 3 * quat_unit(QI, 2, 2)
    ee = SQ3 * (quat_unit(Q1, 2, 1) - quat_unit(Q1, 1, 2)) + 2 * quat_unit(QJ, 1, 1)
    ff = -2 * quat_unit(QK, 1, 1) - SQ3 * (quat_unit(QI, 1, 2) + quat_unit(QI, 2, 1))
    return [hh, ee, ff]


def su2_matrices() -> List[np.ndarray]:
    h = np.diag([1j, -1j])
    e = np.array([[0, -1], [1, 0]], dtype=complex)
    f = np.array([[0, 1j], [1j, 0]])
    return [h, e, f]


# --- full flag manifold -----------------------------------------------------

def _flag_candidates(n: int) -> List[Candidate]:
    e = lambda *c: _e(n, *c)
    lam = ((SQ2 * np.pi, SQ2 * np.pi / SQ3), (0.0, 2 * SQ2 * np.pi / SQ3))
    return [
        Candidate("real_flag", _sub(e((1, 1)), e((3, 1)), e((5, 1))), LAGRANGIAN, True,
                  sec=0.125, description="real flag manifold F(R^3), round of sec 1/8"),
        Candidate("berger", _sub(e((1, 1), (3, 1)), e((2, 1), (4, -1)), e((6, 1))),
                  LAGRANGIAN, False, berger=(SQ2, 0.25), d_invariant=True,
                  description="Berger sphere (r=sqrt2, tau=1/4)"),
        Candidate("torus", _sub(e((1, 1), (3, 1), (5, 1)), e((2, 1), (4, 1), (6, -1))),
                  HOLOMORPHIC, False, sec=0.0, lattice=lam, description="flat torus"),
        Candidate("fiber", _sub(e((1, 1)), e((2, 1))), HOLOMORPHIC, True, sec=2.0,
                  description="fiber S^2(1/sqrt2)"),
        Candidate("sphere_sqrt2", _sub(e((1, 1), (3, 1)), e((2, 1), (4, 1))), HOLOMORPHIC,
                  False, sec=0.5, description="sphere S^2(sqrt2)"),
        Candidate("rp2", _sub(e((1, 1), (3, 1)), e((5, 1))), TOTALLY_REAL, False, sec=0.125,
                  maximal=False, family=True,
                  description="projective plane RP^2(2 sqrt2), any 2-plane of the real flag"),
    ]


@lru_cache(maxsize=None)
def build_flag(k_max: int = DEFAULT_ORDER, tol: Tolerance = DEFAULT_TOL) -> ModelSpaceBundle:
    """F(C^3) = SU(3)/T^2 with metric -tr(XY)."""
    mats = []
    for (i, j) in ((1, 2), (2, 3), (1, 3)):
        mats.append((unit(3, i, j) - unit(3, j, i)) / SQ2)
        mats.append(1j * (unit(3, i, j) + unit(3, j, i)) / SQ2)
    k_mats = [1j * (unit(3, 1, 1) - unit(3, 2, 2)), 1j * (unit(3, 2, 2) - unit(3, 3, 3))]
    alg = _algebra(mats + k_mats, neg_real_trace, tol)
    w = np.exp(2j * np.pi / 3)
    g0 = np.diag([w, 1, np.conj(w)])
    theta = lambda x: g0 @ x @ np.linalg.inv(g0)
    p12 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)
    cyc = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex)
    outer = [lambda x: p12 @ x @ p12.T, np.conj]
    congr = [lambda x: cyc @ x @ cyc.T, lambda x: cyc.T @ x @ cyc]
    return _finish("flag", mats, k_mats, alg, None, ([0, 1], [2, 3, 4, 5]), theta, outer, congr,
                   _flag_candidates, tol, k_max,
                   {"killing_factor": 6, "einstein": 2.5, "einstein_rescale": 0.5})


# --- S^3 x S^3 --------------------------------------------------------------

def _s3s3_candidates(n: int) -> List[Candidate]:
    e = lambda *c: _e(n, *c)
    gam = ((2 * np.pi / SQ3, 2 * np.pi), (4 * np.pi / SQ3, 0.0))
    return [
        Candidate("fiber", _sub(e((1, 1)), e((2, 1)), e((3, 1))), LAGRANGIAN, True, sec=0.75,
                  description="fiber S^3(2/sqrt3)"),
        Candidate("berger", _sub(e((1, 1)), e((5, 1)), e((6, 1))), LAGRANGIAN, True,
                  berger=(2.0, 1.0 / 3.0), d_invariant=True,
                  description="Berger sphere (r=2, tau=1/3)"),
        Candidate("torus", _sub(e((1, 1)), e((4, 1))), HOLOMORPHIC, True, sec=0.0, lattice=gam,
                  description="flat torus"),
        Candidate("sphere_sqrt32", _sub(e((1, 1), (5, 1)), e((2, 1), (4, -1))), HOLOMORPHIC,
                  False, sec=2.0 / 3.0, description="sphere S^2(sqrt(3/2))"),
        Candidate("great_sphere", _sub(e((1, 1)), e((2, 1))), TOTALLY_REAL, True, sec=0.75,
                  maximal=False, d_invariant=False, family=True,
                  description="great sphere S^2(2/sqrt3) in the fiber"),
    ]


def _triple(a, b, c) -> np.ndarray:
    return block_diag(a, b, c)


@lru_cache(maxsize=None)
def build_s3s3(k_max: int = DEFAULT_ORDER, tol: Tolerance = DEFAULT_TOL) -> ModelSpaceBundle:
    """S^3 x S^3 = SU(2)^3 / diagonal SU(2) with metric -sum tr(X_i Y_i)."""
    h, e, f = su2_matrices()
    z = np.zeros((2, 2), dtype=complex)
    mats = [_triple(x, -2 * x, x) / np.sqrt(12.0) for x in (h, e, f)]
    mats += [_triple(x, z, -x) / 2.0 for x in (h, e, f)]
    k_mats = [_triple(x, x, x) for x in (h, e, f)]
    alg = _algebra(mats + k_mats, neg_real_trace, tol)

    def theta(x):
        return block_diag(x[2:4, 2:4], x[4:6, 4:6], x[0:2, 0:2])

    def swap13(x):
        return block_diag(x[4:6, 4:6], x[2:4, 2:4], x[0:2, 0:2])

    def theta_inv(x):
        return block_diag(x[4:6, 4:6], x[0:2, 0:2], x[2:4, 2:4])

    return _finish("s3s3", mats, k_mats, alg, None, ([0, 1, 2], [3, 4, 5]), theta, [swap13],
                   [theta, theta_inv], _s3s3_candidates, tol, k_max,
                   {"killing_factor": 4, "einstein": 5.0 / 3.0, "einstein_rescale": 1.0 / 3.0})


# --- spheres ----------------------------------------------------------------

def _so_unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    m[j, i] = -1.0
    return m


@lru_cache(maxsize=None)
def build_round_sphere(n: int, r: float = 1.0, k_max: int = DEFAULT_ORDER,
                       tol: Tolerance = DEFAULT_TOL) -> ModelSpaceBundle:
    """S^n(r) = SO(n+1)/SO(n), sectional curvature 1/r^2."""
    if n < 2 or r <= 0:
        raise SpaceDefinitionError("need n >= 2 and r > 0")
    mats = [_so_unit(n + 1, i, 0) / r for i in range(1, n + 1)]
    k_mats = [_so_unit(n + 1, i, j) for i, j in combinations(range(1, n + 1), 2)]
    form = lambda x, y: -0.5 * r * r * np.real(np.trace(x @ y))
    alg = _algebra(mats + k_mats, form, tol)
    return _finish(f"sphere{n}_{r:g}", mats, k_mats, alg, None, None, None, [], [], None,
                   tol, k_max, {"radius": r})


@lru_cache(maxsize=None)
def build_berger_sphere(r: float, tau: float, k_max: int = DEFAULT_ORDER,
                        tol: Tolerance = DEFAULT_TOL) -> ModelSpaceBundle:
    """Berger sphere U(2)/U(1) with orthonormal E, X, Y and Hopf direction E.

    The inner product on p is not induced from a bi-invariant metric on u(2),
    so the algebra carries the flag ``bi_invariant=False``.
    """
    if r <= 0 or tau <= 0:
        raise SpaceDefinitionError("need r > 0 and tau > 0")
    k = 1j * unit(2, 1, 1)
    e = 1j * unit(2, 2, 2) / (r * np.sqrt(tau))
    x = (unit(2, 2, 1) - unit(2, 1, 2)) / r
    y = 1j * (unit(2, 2, 1) + unit(2, 1, 2)) / r
    mats = [e, x, y]
    c = structure_from_matrices(mats + [k], tol)
    alg = LieAlgebraData(c, np.eye(4), bi_invariant=False, tol=tol)
    bundle = _finish(f"berger_{r:g}_{tau:g}", mats, [k], alg, ["E", "X", "Y"], ([0], [1, 2]),
                     None, [], [], None, tol, k_max, {"r": r, "tau": tau},
                     require_nr=False)
    curv = bundle.curv
    s_ex = curv.sectional([1, 0, 0], [0, 1, 0])
    s_xy = curv.sectional([0, 1, 0], [0, 0, 1])
    if abs(s_ex - tau / r ** 2) > 1e-9 or abs(s_xy - (4 - 3 * tau) / r ** 2) > 1e-9:
        raise SpaceDefinitionError("Berger model curvature check failed")
    return bundle


# --- catalog access ---------------------------------------------------------

def build(name: str, k_max: int = DEFAULT_ORDER, tol: Tolerance = DEFAULT_TOL) -> ModelSpaceBundle:
    builders = {"cp3": build_cp3, "flag": build_flag, "s3s3": build_s3s3}
    if name not in builders:
        raise UnknownSpaceError(f"unknown space '{name}' (expected one of {', '.join(NK_SPACES)})")
    return builders[name](k_max, tol)


def candidate_catalog(name: str) -> List[Candidate]:
    return list(build(name).candidates)


# --- Berger parameters ------------------------------------------------------

@dataclass(frozen=True)
class BergerParams:
    r: float
    tau: float
    round: bool
    axis: Optional[Tuple[float, ...]] = None

    @property
    def sec_values(self) -> Tuple[float, float]:
        return self.tau / self.r ** 2, (4 - 3 * self.tau) / self.r ** 2


def berger_params_from_subspace(v: Subspace, curv: CurvatureOperatorSet,
                                tol: Tolerance = DEFAULT_TOL) -> BergerParams:
    """Recover (r, tau) from the induced curvature of a 3-dimensional subspace.

    On a Berger sphere the curvature operator on 2-vectors has the eigenvalue
    tau/r^2 on the two planes containing the Hopf direction U and
    (4 - 3 tau)/r^2 on the plane orthogonal to U.
    """
    if v.dim != 3:
        raise NotBergerError(f"need a 3-dimensional subspace, got dimension {v.dim}")
    q = curv.curvature_operator(v)
    w, vec = np.linalg.eigh(q)
    scale = max(1.0, float(np.max(np.abs(w))))
    close = lambda a, b: abs(a - b) < tol.eps_cluster * scale
    if close(w[0], w[2]):
        sec = float(np.mean(w))
        if sec <= 0:
            raise NotBergerError("constant non-positive curvature")
        return BergerParams(1.0 / np.sqrt(sec), 1.0, True)
    if close(w[0], w[1]):
        single, double, ev = w[2], 0.5 * (w[0] + w[1]), vec[:, 2]
    elif close(w[1], w[2]):
        single, double, ev = w[0], 0.5 * (w[1] + w[2]), vec[:, 0]
    else:
        raise NotBergerError(f"three distinct curvature-operator eigenvalues {w}")
    off = float(np.max(np.abs(q - np.diag(np.diag(q)))))
    total = single + 3 * double
    if total <= 0:
        raise NotBergerError("curvature values do not match a Berger sphere")
    r2 = 4.0 / total
    # pairs are (0,1), (0,2), (1,2); the Hodge dual of the single eigenvector is the axis
    star = np.array([ev[2], -ev[1], ev[0]])
    axis = v.basis @ star
    return BergerParams(float(np.sqrt(r2)), float(double * r2), False,
                        tuple(float(a) for a in axis))


# --- torus lattices ---------------------------------------------------------

def _in_isotropy(bundle: ModelSpaceBundle, g: np.ndarray, tol: Tolerance) -> bool:
    if bundle.name == "flag":
        return float(np.max(np.abs(g - np.diag(np.diag(g))))) < tol.eps_zero
    if bundle.name == "s3s3":
        a, b, c = g[0:2, 0:2], g[2:4, 2:4], g[4:6, 4:6]
        off = np.abs(g - block_diag(a, b, c)).max()
        return float(max(off, np.abs(a - b).max(), np.abs(b - c).max())) < tol.eps_zero
    raise UnknownSpaceError(f"no torus lattice for space '{bundle.name}'")


def verify_torus_lattice(name: str, generators: Sequence[Tuple[float, float]],
                         tol: Tolerance = DEFAULT_TOL) -> bool:
    """Check that exp(u X + v Y) lies in the isotropy group for each generator.

    (u, v) are coordinates against the orthonormal basis of the torus tangent
    plane stored in the catalog.
    """
    if name not in ("flag", "s3s3"):
        raise UnknownSpaceError(f"no torus lattice for space '{name}'")
    bundle = build(name)
    if name == "flag":
        bx = _e(6, (1, 1), (3, 1), (5, 1)) / SQ3
        by = _e(6, (2, 1), (4, 1), (6, -1)) / SQ3
    else:
        bx, by = _e(6, (1, 1)), _e(6, (4, 1))
    mx, my = bundle.p_matrix(bx), bundle.p_matrix(by)
    if np.abs(mx @ my - my @ mx).max() >= tol.eps_zero:
        raise NotAbelianError("torus basis elements do not commute")
    for u, v in generators:
        g = scipy.linalg.expm(u * mx + v * my)
        if not _in_isotropy(bundle, g, tol):
            return False
    return True


# --- isotropy canonicalization ----------------------------------------------

def _score(p: np.ndarray) -> float:
    n = p.shape[0]
    w = 0.5 ** np.arange(n)
    return -float(w @ np.diag(p))


def isotropy_orbit_normalize(v: Subspace, bundle: ModelSpaceBundle, budget: int = 20,
                             grid: int = 48) -> Subspace:
    """Greedy descent of a projector score over isotropy rotations and finite symmetries.

    Heuristic: used only to merge duplicates, never for verdicts.
    """
    from scipy.optimize import minimize_scalar

    space = bundle.space
    gens = []
    for a in range(space.dim_k):
        w = np.zeros(space.dim_k)
        w[a] = 1.0
        gens.append(space.ad_k(w))
    finite = list(bundle.congruences)
    cur = v
    best = _score(cur.projector)
    ts = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    for _ in range(budget):
        improved = False
        for op in finite:
            cand = Subspace(op @ cur.basis)
            s = _score(cand.projector)
            if s < best - 1e-10:
                cur, best, improved = cand, s, True
        for gen in gens:
            f = lambda t: _score(mat_exp(t * gen) @ cur.projector @ mat_exp(-t * gen))
            vals = [f(t) for t in ts]
            i = int(np.argmin(vals))
            h = ts[1] - ts[0]
            opt = minimize_scalar(f, bounds=(ts[i] - h, ts[i] + h), method="bounded",
                                  options={"xatol": 1e-12})
            t_best, s_best = (opt.x, opt.fun) if opt.fun < vals[i] else (ts[i], vals[i])
            if s_best < best - 1e-10:
                cur = orthonormalize(list((mat_exp(t_best * gen) @ cur.basis).T))
                best, improved = _score(cur.projector), True
        if not improved:
            break
    return cur
