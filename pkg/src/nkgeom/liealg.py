"""Lie algebras given by structure constants, and reductive decompositions.

A ``ReductiveSpace`` works in *adapted coordinates*: the first ``dim_p``
coordinates are an orthonormal basis of the complement p (with respect to
its own inner product), the remaining ``dim_k`` coordinates span the
isotropy algebra k.  All geometric tensors downstream are written in the
orthonormal p-basis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ClosureError, DimensionError, SpaceDefinitionError
from .numkernel import DEFAULT_TOL, Subspace, Tolerance, span_columns, subspace_contains


def jacobi_residual(c: np.ndarray) -> float:
    """Largest Jacobi-identity defect over basis triples."""
    # J[i,j,k] = [[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]
    t = np.einsum("ijm,mkn->ijkn", c, c)
    jac = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    return float(np.max(np.abs(jac), initial=0.0))


def antisymmetry_residual(c: np.ndarray) -> float:
    return float(np.max(np.abs(c + np.transpose(c, (1, 0, 2))), initial=0.0))


def ad_invariance_residual(c: np.ndarray, metric: np.ndarray) -> float:
    """Largest value of <[x,y],z> + <y,[x,z]> over basis triples."""
    m = np.einsum("ijm,mk->ijk", c, metric)
    return float(np.max(np.abs(m + np.transpose(m, (0, 2, 1))), initial=0.0))


@dataclass(frozen=True, eq=False)
class LieAlgebraData:
    """Structure constants ``c[i,j,k]`` with ``[e_i,e_j] = sum_k c[i,j,k] e_k``.

    ``metric`` is a positive definite Gram matrix.  When ``bi_invariant`` is
    set the metric must also be ad-invariant.
    """

    structure: np.ndarray
    metric: np.ndarray
    names: Tuple[str, ...] = ()
    bi_invariant: bool = True
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        c = np.array(self.structure, dtype=float)
        g = np.array(self.metric, dtype=float)
        n = c.shape[0]
        if c.shape != (n, n, n):
            raise SpaceDefinitionError(f"structure tensor must be n x n x n, got {c.shape}")
        if g.shape != (n, n):
            raise SpaceDefinitionError(f"metric must be {n} x {n}, got {g.shape}")
        res = antisymmetry_residual(c)
        if res >= self.tol.eps_zero:
            raise SpaceDefinitionError(f"structure constants not antisymmetric (residual {res:.3e})")
        res = jacobi_residual(c)
        if res >= self.tol.eps_zero:
            raise SpaceDefinitionError(f"Jacobi identity fails (residual {res:.3e})")
        res = float(np.max(np.abs(g - g.T), initial=0.0))
        if res >= self.tol.eps_zero:
            raise SpaceDefinitionError(f"metric not symmetric (residual {res:.3e})")
        if np.min(np.linalg.eigvalsh(0.5 * (g + g.T))) <= 0:
            raise SpaceDefinitionError("metric not positive definite")
        if self.bi_invariant:
            res = ad_invariance_residual(c, g)
            if res >= self.tol.eps_zero:
                raise SpaceDefinitionError(f"metric not ad-invariant (residual {res:.3e})")
        c.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "structure", c)
        object.__setattr__(self, "metric", g)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.structure)

    def ad(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ad_x acting on column vectors."""
        return np.einsum("i,ijk->kj", x, self.structure)

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ self.metric @ y)

    def residuals(self) -> Dict[str, float]:
        return {
            "antisymmetry": antisymmetry_residual(self.structure),
            "jacobi": jacobi_residual(self.structure),
            "ad_invariance": ad_invariance_residual(self.structure, self.metric),
        }


def _realify(mats: Sequence[np.ndarray]) -> np.ndarray:
    arr = np.stack([np.asarray(m, dtype=complex).ravel() for m in mats], axis=1)
    return np.vstack([arr.real, arr.imag])


def coordinates_in(basis_mats: Sequence[np.ndarray], x: np.ndarray,
                   tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Real coordinates of the matrix x in the given real basis of matrices."""
    a = _realify(basis_mats)
    b = _realify([x])[:, 0]
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    res = float(np.max(np.abs(a @ coef - b), initial=0.0))
    if res >= tol.eps_zero:
        raise ClosureError(f"matrix not in the span of the basis (residual {res:.3e})")
    return coef


def structure_from_matrices(basis_mats: Sequence[np.ndarray],
                            tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Structure constants of a matrix Lie algebra in the given basis."""
    n = len(basis_mats)
    a = _realify(basis_mats)
    if np.linalg.matrix_rank(a) != n:
        raise DimensionError("basis matrices are linearly dependent")
    pinv = np.linalg.pinv(a)
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(i + 1, n):
            br = basis_mats[i] @ basis_mats[j] - basis_mats[j] @ basis_mats[i]
            b = _realify([br])[:, 0]
            coef = pinv @ b
            res = float(np.max(np.abs(a @ coef - b), initial=0.0))
            if res >= tol.eps_zero:
                raise ClosureError(f"bracket of basis elements {i},{j} leaves the span "
                                   f"(residual {res:.3e})")
            c[i, j] = coef
            c[j, i] = -coef
    return c


def gram_from_matrices(basis_mats: Sequence[np.ndarray], form) -> np.ndarray:
    n = len(basis_mats)
    g = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = float(np.real(form(basis_mats[i], basis_mats[j])))
    return g


@dataclass(frozen=True)
class CanonicalSubalgebra:
    """Data attached to s = [v,v] + v for a subspace v of p.

    Subspaces are expressed in adapted coordinates of the ambient algebra.
    """

    one_step: Subspace
    closure: Subspace
    is_subalgebra: bool
    splits: bool
    k_dim: int
    sweeps: int
    closure_residual: float
    split_residual: float

    @property
    def canonically_embedded(self) -> bool:
        return self.is_subalgebra and self.splits


class ReductiveSpace:
    """A decomposition g = k + p together with an Ad(K)-invariant inner product on p.

    Parameters
    ----------
    algebra:
        The Lie algebra g.
    k_basis:
        Columns spanning k, in g-coordinates.
    p_basis:
        Columns spanning the complement p, in g-coordinates.
    p_metric:
        Inner product on p expressed in the given p_basis.  Defaults to the
        restriction of the metric of g.
    """

    def __init__(self, algebra: LieAlgebraData, k_basis: np.ndarray, p_basis: np.ndarray,
                 p_metric: Optional[np.ndarray] = None, name: str = "",
                 labels: Optional[Sequence[str]] = None,
                 fibration: Optional[Tuple[Sequence[int], Sequence[int]]] = None,
                 outer_isometries: Sequence[np.ndarray] = (),
                 tol: Tolerance = DEFAULT_TOL):
        self.algebra = algebra
        self.name = name
        self.tol = tol
        n = algebra.dim
        kb = np.asarray(k_basis, dtype=float).reshape(n, -1)
        pb = np.asarray(p_basis, dtype=float).reshape(n, -1)
        if kb.shape[1] + pb.shape[1] != n:
            raise SpaceDefinitionError(
                f"dim k + dim p = {kb.shape[1] + pb.shape[1]} differs from dim g = {n}")
        frame = np.hstack([pb, kb])
        if np.linalg.matrix_rank(frame, tol=1e-10) != n:
            raise SpaceDefinitionError("k and p do not span g")
        if p_metric is None:
            p_metric = pb.T @ algebra.metric @ pb
        p_metric = np.asarray(p_metric, dtype=float)
        if np.max(np.abs(p_metric - np.eye(pb.shape[1])), initial=0.0) > 1e-12:
            # re-express p in a basis orthonormal for its inner product
            chol = np.linalg.cholesky(p_metric)
            pb = pb @ np.linalg.inv(chol).T
        self.dim_p = pb.shape[1]
        self.dim_k = kb.shape[1]
        self.p_basis = pb
        self.k_basis = kb
        self.frame = np.hstack([pb, kb])
        self._frame_inv = np.linalg.inv(self.frame)
        c = algebra.structure
        # structure constants in adapted coordinates
        a = np.einsum("ia,jb,ijk->abk", self.frame, self.frame, c)
        self.adapted = np.einsum("abk,ck->abc", a, self._frame_inv)
        dp = self.dim_p
        self.labels = tuple(labels) if labels else tuple(f"e{i + 1}" for i in range(dp))
        self.bracket_pp_p = self.adapted[:dp, :dp, :dp].copy()
        self.bracket_pp_k = self.adapted[:dp, :dp, dp:].copy()
        self.ad_k_on_p = self.adapted[dp:, :dp, :dp].copy()
        self._validate()
        bp = self.bracket_pp_p
        self.u_tensor_array = 0.5 * (np.transpose(bp, (1, 2, 0)) + np.transpose(bp, (2, 1, 0)))
        self.difference_array = 0.5 * bp + self.u_tensor_array
        if fibration is not None:
            v_idx, h_idx = fibration
            self.fibration = (Subspace.coordinate(dp, v_idx), Subspace.coordinate(dp, h_idx))
            self.fibration_indices = (tuple(int(i) for i in v_idx), tuple(int(i) for i in h_idx))
            if sorted(self.fibration_indices[0] + self.fibration_indices[1]) != list(range(dp)):
                raise SpaceDefinitionError("fibration V and H must partition the p-basis")
        else:
            self.fibration = None
            self.fibration_indices = None
        self.outer_isometries = tuple(np.asarray(m, dtype=float) for m in outer_isometries)
        for m in self.outer_isometries:
            if m.shape != (dp, dp) or np.max(np.abs(m.T @ m - np.eye(dp))) >= tol.eps_zero:
                raise SpaceDefinitionError("outer isometry is not an orthogonal map of p")

    def _validate(self):
        eps = self.tol.eps_zero
        dp = self.dim_p
        kk_p = self.adapted[dp:, dp:, :dp]
        res = float(np.max(np.abs(kk_p), initial=0.0))
        if res >= eps:
            raise SpaceDefinitionError(f"k is not closed under the bracket (residual {res:.3e})")
        kp_k = self.adapted[dp:, :dp, dp:]
        res = float(np.max(np.abs(kp_k), initial=0.0))
        if res >= eps:
            raise SpaceDefinitionError(f"[k,p] is not contained in p (residual {res:.3e})")
        skew = self.ad_k_on_p + np.transpose(self.ad_k_on_p, (0, 2, 1))
        res = float(np.max(np.abs(skew), initial=0.0))
        if res >= eps:
            raise SpaceDefinitionError(f"inner product on p is not Ad(K)-invariant (residual {res:.3e})")

    # --- coordinates -------------------------------------------------------

    def to_adapted(self, x_g: np.ndarray) -> np.ndarray:
        return self._frame_inv @ np.asarray(x_g, dtype=float)

    def from_adapted(self, x_a: np.ndarray) -> np.ndarray:
        return self.frame @ np.asarray(x_a, dtype=float)

    def p_to_g(self, x_p: np.ndarray) -> np.ndarray:
        return self.p_basis @ np.asarray(x_p, dtype=float)

    def p_to_adapted(self, x_p: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim_p + self.dim_k)
        out[:self.dim_p] = x_p
        return out

    def p_subspace_to_adapted(self, v: Subspace) -> Subspace:
        return Subspace(np.vstack([v.basis, np.zeros((self.dim_k, v.dim))]))

    @property
    def dim_g(self) -> int:
        return self.dim_p + self.dim_k

    # --- algebra in adapted coordinates ------------------------------------

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Bracket of two elements given in adapted coordinates."""
        return np.einsum("i,j,ijk->k", x, y, self.adapted)

    def project_p(self, x: np.ndarray) -> np.ndarray:
        """p-component of an adapted vector, as an adapted vector."""
        out = np.array(x, dtype=float)
        out[self.dim_p:] = 0.0
        return out

    def project_k(self, x: np.ndarray) -> np.ndarray:
        out = np.array(x, dtype=float)
        out[:self.dim_p] = 0.0
        return out

    def bracket_p(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """[X,Y]_p for X, Y in p (p-coordinates in and out)."""
        return np.einsum("i,j,ijk->k", x, y, self.bracket_pp_p)

    def bracket_k(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """[X,Y]_k for X, Y in p, in k-coordinates."""
        return np.einsum("i,j,ijk->k", x, y, self.bracket_pp_k)

    def ad_k(self, w_k: np.ndarray) -> np.ndarray:
        """Matrix of ad_W on p for W in k given in k-coordinates."""
        return np.einsum("a,aij->ji", w_k, self.ad_k_on_p)

    def u_tensor(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.u_tensor_array)

    def is_naturally_reductive(self) -> Tuple[bool, float]:
        res = float(np.max(np.linalg.norm(self.u_tensor_array, axis=2), initial=0.0))
        return res < self.tol.eps_zero, res

    def closure_residual(self, s: Subspace) -> float:
        """Largest escape of [s_i, s_j] from s over basis pairs (adapted coordinates)."""
        if s.dim == 0:
            return 0.0
        br = np.einsum("ia,jb,ijk->abk", s.basis, s.basis, self.adapted)
        esc = br - br @ s.projector
        return float(np.max(np.linalg.norm(esc, axis=2), initial=0.0))

    def _bracket_span(self, s: Subspace) -> np.ndarray:
        br = np.einsum("ia,jb,ijk->abk", s.basis, s.basis, self.adapted)
        return br.reshape(-1, self.dim_g).T

    def generated_canonical_subalgebra(self, v: Subspace) -> CanonicalSubalgebra:
        """s = [v,v] + v, whether it is a subalgebra, and whether it equals [v,v]_k + v."""
        tol = self.tol
        if v.ambient_dim != self.dim_p:
            raise DimensionError("subspace must live in p")
        va = self.p_subspace_to_adapted(v)
        if v.dim == 0:
            z = Subspace.zero(self.dim_g)
            return CanonicalSubalgebra(z, z, True, True, 0, 0, 0.0, 0.0)
        brs = self._bracket_span(va)
        one = span_columns(np.hstack([va.basis, brs]), tol)
        closed_res = self.closure_residual(one)
        # [v,v]_p must already lie in v
        br_p = brs[:self.dim_p]
        split_res = float(np.max(np.linalg.norm(br_p - v.projector @ br_p, axis=0), initial=0.0))
        k_dim = span_columns(brs[self.dim_p:], tol).dim
        cur = one
        sweeps = 0
        for sweeps in range(1, self.dim_g + 2):
            nxt = span_columns(np.hstack([cur.basis, self._bracket_span(cur)]), tol)
            if nxt.dim == cur.dim:
                break
            cur = nxt
        else:
            raise ClosureError("bracket closure did not stabilize")
        return CanonicalSubalgebra(
            one_step=one, closure=cur, is_subalgebra=closed_res < tol.eps_zero,
            splits=split_res < tol.eps_zero, k_dim=k_dim, sweeps=sweeps,
            closure_residual=closed_res, split_residual=split_res)

    # --- serialization ------------------------------------------------------

    def to_definition(self, extra: Optional[dict] = None) -> dict:
        """Space-definition document expressed in adapted coordinates."""
        dp = self.dim_p
        doc = {
            "name": self.name,
            "dim": self.dim_g,
            "structure": self.adapted.tolist(),
            "metric": _adapted_metric(self).tolist(),
            "bi_invariant": bool(self.algebra.bi_invariant),
            "k_indices": list(range(dp, self.dim_g)),
            "labels": list(self.labels),
        }
        if self.fibration_indices is not None:
            doc["fibration"] = {"V": list(self.fibration_indices[0]),
                                "H": list(self.fibration_indices[1])}
        if self.outer_isometries:
            doc["outer_isometries"] = [m.tolist() for m in self.outer_isometries]
        if extra:
            doc.update(extra)
        return doc


def _adapted_metric(space: ReductiveSpace) -> np.ndarray:
    """Metric in adapted coordinates with the p-block replaced by the p inner product."""
    g = space.frame.T @ space.algebra.metric @ space.frame
    dp = space.dim_p
    if space.algebra.bi_invariant:
        return g
    out = np.zeros_like(g)
    out[:dp, :dp] = np.eye(dp)
    out[dp:, dp:] = g[dp:, dp:]
    return out


def _orthogonal_complement_basis(metric: np.ndarray, kb: np.ndarray) -> np.ndarray:
    n = metric.shape[0]
    proj = np.eye(n) - kb @ np.linalg.solve(kb.T @ metric @ kb, kb.T @ metric)
    cols = []
    for i in range(n):
        w = proj[:, i].copy()
        for q in cols:
            w -= (q @ metric @ w) * q
        nrm = np.sqrt(max(w @ metric @ w, 0.0))
        if nrm > 1e-9:
            cols.append(w / nrm)
    return np.column_stack(cols)


def load_space_definition(source: Union[str, Path, dict],
                          tol: Tolerance = DEFAULT_TOL) -> ReductiveSpace:
    """Build a ReductiveSpace from a space-definition document.

    Invariants are checked in a fixed order and the first violation raises
    ``SpaceDefinitionError`` naming it.
    """
    if isinstance(source, dict):
        doc = source
    else:
        try:
            doc = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SpaceDefinitionError(f"cannot read space definition: {exc}") from exc
    for key in ("dim", "structure", "metric"):
        if key not in doc:
            raise SpaceDefinitionError(f"missing field '{key}'")
    n = doc["dim"]
    if not isinstance(n, int) or n <= 0:
        raise SpaceDefinitionError("'dim' must be a positive integer")
    try:
        c = np.asarray(doc["structure"], dtype=float)
        g = np.asarray(doc["metric"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpaceDefinitionError(f"non-numeric structure or metric: {exc}") from exc
    if c.shape != (n, n, n):
        raise SpaceDefinitionError(f"structure must have shape ({n},{n},{n}), got {c.shape}")
    bi = bool(doc.get("bi_invariant", True))
    alg = LieAlgebraData(c, g, bi_invariant=bi, tol=tol)
    if "k_indices" in doc:
        kidx = [int(i) for i in doc["k_indices"]]
        if any(i < 0 or i >= n for i in kidx) or len(set(kidx)) != len(kidx):
            raise SpaceDefinitionError("'k_indices' out of range or repeated")
        eye = np.eye(n)
        kb = eye[:, kidx]
        pidx = [i for i in range(n) if i not in kidx]
        pb = eye[:, pidx]
        gp = pb.T @ g @ pb
        kp = float(np.max(np.abs(kb.T @ g @ pb), initial=0.0))
        if kp >= tol.eps_zero:
            pb = _orthogonal_complement_basis(g, kb)
            gp = None
    elif "k_basis" in doc:
        kb = np.asarray(doc["k_basis"], dtype=float).T.reshape(n, -1)
        pb = _orthogonal_complement_basis(g, kb)
        gp = None
    else:
        raise SpaceDefinitionError("need 'k_indices' or 'k_basis'")
    fib = doc.get("fibration")
    fibration = (fib["V"], fib["H"]) if fib else None
    outer = doc.get("outer_isometries", ())
    return ReductiveSpace(alg, kb, pb, p_metric=gp, name=doc.get("name", ""),
                          labels=doc.get("labels"), fibration=fibration,
                          outer_isometries=outer, tol=tol)


def dump_space_definition(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True)
