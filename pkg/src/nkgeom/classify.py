"""Classification driver: Grassmannian search, fingerprints, table checks and reports.

Work is split into fixed-size chunks whose random streams are keyed by the
chunk index, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cones import ConeGeometry, ScanReport, hypersurface_obstruction_scan
from .errors import NotBergerError
from .homgeo import DEFAULT_ORDER, TGVerdict
from .modelspaces import (NK_SPACES, BergerParams, Candidate, ModelSpaceBundle,
                          berger_params_from_subspace, build, isotropy_orbit_normalize,
                          verify_torus_lattice)
from .nkstruct import classify_J_type, kahler_angle
from .numkernel import DEFAULT_TOL, Subspace, Tolerance, orthonormalize, random_frames, subspace_contains

SCHEMA_VERSION = 1
CHUNK = 4096
THREADS_ENV = "NKGEOM_THREADS"
KEY_DIGITS = 7
CLEAN_FACTOR = 10.0


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


# --- JSON helpers -----------------------------------------------------------

_RADICANDS = (1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 21, 30)


def round_sig(x: float, digits: int = 15) -> float:
    if not math.isfinite(x):
        return x
    return float(f"{x:.{digits}g}")


def symbolic_tag(x: float, max_den: int = 64, tol: float = 1e-12) -> Optional[str]:
    """Short closed form p/q, p/q*sqrtm or p/q*pi for x, if one fits."""
    if not math.isfinite(x):
        return None
    if abs(x) < tol:
        return "0"
    for m in _RADICANDS:
        f = Fraction(x / math.sqrt(m)).limit_denominator(max_den)
        if f != 0 and abs(float(f) * math.sqrt(m) - x) < tol * max(1.0, abs(x)):
            return _format_coeff(f, f"sqrt{m}" if m > 1 else "")
    f = Fraction(x / math.pi).limit_denominator(max_den)
    if f != 0 and abs(float(f) * math.pi - x) < tol * max(1.0, abs(x)):
        return _format_coeff(f, "pi")
    return None


def _format_coeff(f: Fraction, unit: str) -> str:
    if not unit:
        return str(f)
    if f == 1:
        return unit
    if f == -1:
        return "-" + unit
    return f"{f}*{unit}"


def number(x: Optional[float]):
    """JSON value for a geometric parameter: rounded decimal plus a symbolic tag."""
    if x is None:
        return None
    out = {"value": round_sig(float(x))}
    tag = symbolic_tag(float(x))
    if tag is not None:
        out["symbolic"] = tag
    return out


def to_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# --- fingerprints -----------------------------------------------------------

def _q(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    v = round(float(x), KEY_DIGITS)
    return 0.0 if v == 0 else v


@dataclass(frozen=True)
class Fingerprint:
    """Isotropy-invariant data of a tangent subspace.

    ``sec_spectrum`` is the spectrum of the curvature operator on 2-vectors
    of v, which for a plane is its sectional curvature.
    """

    dim: int
    sec_spectrum: Tuple[float, ...]
    kahler_type: Optional[str]
    kahler_angle: Optional[float]
    d_invariant: bool
    vertical_dim: Optional[int]
    well_positioned: Optional[bool]
    berger_or_round: Optional[Tuple[float, float]]

    def class_key(self) -> tuple:
        """Fields compared when matching classes.

        Vertical dimension and well-positionedness depend on the chosen
        fibration, which outer symmetries of the space move; they are
        reported but not used to identify classes.
        """
        return (self.dim, tuple(_q(s) for s in self.sec_spectrum), self.kahler_type,
                _q(self.kahler_angle), self.d_invariant,
                None if self.berger_or_round is None else tuple(_q(a) for a in self.berger_or_round))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "sec_spectrum": [number(s) for s in self.sec_spectrum],
            "kahler_type": self.kahler_type,
            "kahler_angle": number(self.kahler_angle),
            "d_invariant": self.d_invariant,
            "vertical_dim": self.vertical_dim,
            "well_positioned": self.well_positioned,
            "berger_or_round": (None if self.berger_or_round is None
                                else {"r": number(self.berger_or_round[0]),
                                      "tau": number(self.berger_or_round[1])}),
        }


def _spectrum(bundle: ModelSpaceBundle, v: Subspace, tol: Tolerance) -> Tuple[float, ...]:
    if v.dim < 2:
        return ()
    w = np.linalg.eigvalsh(bundle.curv.curvature_operator(v))
    return tuple(float(a) for a in w)


def geometry_params(bundle: ModelSpaceBundle, v: Subspace,
                    tol: Tolerance = DEFAULT_TOL) -> Optional[Tuple[float, float]]:
    """(r, tau) for round or Berger 3-spaces, (r, 1) for positively curved planes."""
    if v.dim == 2:
        sec = bundle.curv.sectional(*v.basis.T)
        return (1.0 / math.sqrt(sec), 1.0) if sec > tol.eps_cluster else None
    if v.dim == 3:
        try:
            p = berger_params_from_subspace(v, bundle.curv, tol)
        except NotBergerError:
            return None
        return (p.r, p.tau)
    return None


def fingerprint(bundle: ModelSpaceBundle, v: Subspace, tol: Tolerance = DEFAULT_TOL,
                fibration: bool = True) -> Fingerprint:
    """Fingerprint of v; ``fibration=False`` skips the sampled well-positioned test."""
    curv = bundle.curv
    jt, angle = None, None
    if bundle.nk is not None:
        jt = classify_J_type(v, bundle.nk, tol)
        ka = kahler_angle(v, bundle.nk, tol)
        angle = ka.angle if ka.constant else None
    vert, wp = None, None
    if fibration and bundle.space.fibration is not None:
        rep = curv.well_positioned_check(v)
        vert, wp = rep.vertical_dim, rep.well_positioned
    return Fingerprint(v.dim, _spectrum(bundle, v, tol), jt, angle,
                       curv.d_residual(v) < tol.eps_zero, vert, wp,
                       geometry_params(bundle, v, tol))


# --- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepStats:
    dim: int
    samples: int
    passes: int
    min_residual: float
    floor: float

    @property
    def clean(self) -> bool:
        return self.passes == 0 and self.min_residual > self.floor

    def to_json(self) -> dict:
        return {"dim": self.dim, "samples": self.samples, "passes": self.passes,
                "min_residual": round_sig(self.min_residual), "floor": self.floor,
                "clean": self.clean}


def _lazy_min_residual(curv, frames: np.ndarray, eps: float) -> Tuple[float, np.ndarray]:
    """Exact minimum over frames of the order 0..1 residual, plus the passing mask.

    Order-0 residuals are computed for every frame; the order-1 tensor is
    evaluated only on frames whose order-0 residual could still beat the
    running minimum.
    """
    r0 = curv.batch_residuals(frames, 0)
    order = np.argsort(r0, kind="stable")
    best = np.inf
    passing = np.zeros(len(frames), dtype=bool)
    block = 32
    pos = 0
    while pos < len(order) and (r0[order[pos]] < best or r0[order[pos]] < eps):
        idx = order[pos:pos + block]
        r1 = curv.batch_residuals(frames[idx], 1)
        comb = np.maximum(r0[idx], r1)
        best = min(best, float(comb.min()))
        passing[idx] = comb < eps
        pos += block
    return best, passing


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _sweep_chunk(args):
    curv, n, d, seed, index, count, eps = args
    frames = random_frames(_chunk_rng(seed, index), count, n, d)
    best, passing = _lazy_min_residual(curv, frames, eps)
    return best, frames[passing]


def random_sweep(bundle: ModelSpaceBundle, d: int, samples: int, seed: int = 0,
                 threads: Optional[int] = None, tol: Tolerance = DEFAULT_TOL
                 ) -> Tuple[SweepStats, List[Subspace]]:
    """Seeded random d-subspaces screened against R and nabla R.

    Returns the statistics and the frames that passed the screen.
    """
    n = bundle.space.dim_p
    threads = threads or default_threads()
    jobs = []
    for index, start in enumerate(range(0, samples, CHUNK)):
        jobs.append((bundle.curv, n, d, seed, index, min(CHUNK, samples - start), tol.eps_zero))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_chunk, jobs))
    else:
        results = [_sweep_chunk(j) for j in jobs]
    best = min((r[0] for r in results), default=np.inf)
    survivors = [Subspace(f) for r in results for f in r[1]]
    return SweepStats(d, samples, len(survivors), float(best), CLEAN_FACTOR * tol.eps_zero), survivors


# --- structured seeds -------------------------------------------------------

_COEFFS = (1.0, math.sqrt(2.0), math.sqrt(3.0), 2.0)


def structured_vectors(n: int) -> np.ndarray:
    """Basis vectors, a e_i + s b e_j and (e_i +- e_j +- e_k)/sqrt3, normalized."""
    eye = np.eye(n)
    vecs = [eye[i] for i in range(n)]
    for i, j in combinations(range(n), 2):
        for a, b in product(_COEFFS, _COEFFS):
            for s in (1.0, -1.0):
                vecs.append(a * eye[i] + s * b * eye[j])
    for i, j, k in combinations(range(n), 3):
        for s, t in product((1.0, -1.0), repeat=2):
            vecs.append(eye[i] + s * eye[j] + t * eye[k])
    out = np.array(vecs)
    out /= np.linalg.norm(out, axis=1, keepdims=True)
    # drop duplicate lines
    keys = {}
    for v in out:
        sgn = np.sign(v[np.argmax(np.abs(v) > 1e-12)])
        keys.setdefault(tuple(np.round(sgn * v, 10)), sgn * v)
    return np.array([keys[k] for k in sorted(keys)])


def structured_frames(n: int, d: int, cap: int, seed: int) -> np.ndarray:
    """Orthonormal frames spanned by structured vectors.

    All pairs are used for d = 2; for larger d a seeded subset of at most
    ``cap`` tuples is drawn, together with all coordinate subspaces.
    """
    vecs = structured_vectors(n)
    m = len(vecs)
    if d == 2:
        tuples = np.array(list(combinations(range(m), 2)))
    else:
        rng = _chunk_rng(seed, 1 << 20)
        tuples = np.sort(rng.integers(0, m, size=(cap, d)), axis=1)
    frames = vecs[tuples].transpose(0, 2, 1)
    if d != 2:
        coords = np.array([np.eye(n)[:, list(c)] for c in combinations(range(n), d)])
        frames = np.concatenate([coords, frames])
    q, r = np.linalg.qr(frames)
    full = np.min(np.abs(np.diagonal(r, axis1=1, axis2=2)), axis=1) > 1e-8
    return q[full]


# --- search -----------------------------------------------------------------

@dataclass
class Survivor:
    """A subspace that passed the batched invariance screen.

    ``order_verified`` is the highest order of nabla^k R checked in batch;
    ``verdict`` holds the full per-subspace check and is filled for class
    representatives only.
    """

    subspace: Subspace
    residual: float
    fingerprint: Fingerprint
    source: str
    order_verified: int
    catalog_label: Optional[str] = None
    verdict: Optional[TGVerdict] = None


@dataclass
class SearchResult:
    space: str
    dim: int
    samples: int
    seed: int
    order: int
    random_stats: SweepStats
    survivors: List[Survivor]
    classes: Dict[tuple, List[Survivor]]
    unmatched: List[tuple]
    rejected_by_full_check: int = 0

    def class_labels(self) -> List[Optional[str]]:
        return [members[0].catalog_label for members in self.classes.values()]

    def to_json(self) -> dict:
        classes = []
        for key, members in self.classes.items():
            rep = members[0]
            classes.append({
                "catalog_label": rep.catalog_label,
                "full_checks": sum(1 for m in members if m.verdict is not None),
                "verified_at_order": sum(1 for m in members if m.order_verified == self.order),
                "fingerprint": rep.fingerprint.to_json(),
                "members": len(members),
                "representative": [[round_sig(a) for a in col] for col in rep.subspace.basis.T],
            })
        return {
            "schema": SCHEMA_VERSION,
            "space": self.space, "dim": self.dim, "samples": self.samples, "seed": self.seed,
            "order": self.order,
            "random_sweep": self.random_stats.to_json(),
            "survivor_count": len(self.survivors),
            "classes": classes,
            "unmatched_classes": len(self.unmatched),
            "rejected_by_full_check": self.rejected_by_full_check,
        }


def catalog_keys(bundle: ModelSpaceBundle, tol: Tolerance = DEFAULT_TOL) -> Dict[tuple, str]:
    return {fingerprint(bundle, c.subspace, tol).class_key(): c.label for c in bundle.candidates}


def _dedupe(subspaces: Sequence[Subspace]) -> List[Subspace]:
    seen, out = set(), []
    for v in subspaces:
        key = tuple(np.round(v.projector, 6).ravel() + 0.0)
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


def _screen(bundle: ModelSpaceBundle, frames: np.ndarray, tol: Tolerance) -> List[Subspace]:
    out = []
    for start in range(0, len(frames), CHUNK):
        block = frames[start:start + CHUNK]
        r = bundle.curv.batch_residuals(block, 0)
        keep = block[r < tol.eps_zero]
        if len(keep):
            r1 = bundle.curv.batch_residuals(keep, 1)
            out.extend(Subspace(f) for f in keep[r1 < tol.eps_zero])
    return out


def search_tg_subspaces(bundle: ModelSpaceBundle, d: int, samples: int, seed: int = 0,
                        order: int = DEFAULT_ORDER, threads: Optional[int] = None,
                        structured_cap: int = 20000, verify_cap: int = 256,
                        representatives: int = 4, normalize: bool = False,
                        tol: Tolerance = DEFAULT_TOL) -> SearchResult:
    """Random, catalog and structured candidates, screened then checked.

    Candidates passing the order 0..1 screen are grouped by fingerprint
    class.  The first ``verify_cap`` members of each class are tested for
    invariance under nabla^k R for all k <= ``order`` in one batch, and the
    first ``representatives`` of those also get the full per-subspace check
    (exponential criterion and fibration data).  Further members of large
    families are kept as screened only.  With ``normalize`` each class
    representative is moved to a canonical position in its isotropy orbit.
    """
    n = bundle.space.dim_p
    if not 1 <= d <= n:
        raise ValueError(f"dimension must be between 1 and {n}")
    stats, rand = random_sweep(bundle, d, samples, seed, threads, tol)
    cands: List[Tuple[Subspace, str]] = [(v, "random") for v in rand]
    for c in bundle.candidates:
        if c.subspace.dim == d:
            cands.append((c.subspace, f"catalog:{c.label}"))
            for g in bundle.congruences:
                cands.append((Subspace(g @ c.subspace.basis), f"catalog:{c.label}"))
    for v in _screen(bundle, structured_frames(n, d, structured_cap, seed), tol):
        cands.append((v, "structured"))
    uniq, seen = [], set()
    for v, src in cands:
        key = tuple(np.round(v.projector, 6).ravel() + 0.0)
        if key not in seen:
            seen.add(key)
            uniq.append((v, src))
    screened = np.zeros(len(uniq))
    if uniq:
        screened = bundle.curv.batch_residuals(np.array([v.basis for v, _ in uniq]),
                                               min(1, order))
    known = catalog_keys(bundle, tol)
    grouped: Dict[tuple, List[Survivor]] = {}
    for (v, src), res in zip(uniq, screened):
        if res < tol.eps_zero:
            fp = fingerprint(bundle, v, tol, fibration=False)
            key = fp.class_key()
            grouped.setdefault(key, []).append(
                Survivor(v, float(res), fp, src, min(1, order), known.get(key)))
    rejected = 0
    classes: Dict[tuple, List[Survivor]] = {}
    for key in sorted(grouped, key=repr):
        members = grouped[key]
        head = members[:verify_cap]
        full = bundle.curv.batch_residuals(np.array([m.subspace.basis for m in head]), order)
        kept = []
        for m, res in zip(head, full):
            if res >= tol.eps_zero:
                rejected += 1
                continue
            m.residual, m.order_verified = float(res), order
            kept.append(m)
        for m in kept[:representatives]:
            m.verdict = bundle.curv.tg_check(m.subspace, order, seed=seed)
            m.fingerprint = fingerprint(bundle, m.subspace, tol)
        failed = [m for m in kept[:representatives] if not m.verdict.is_tg]
        rejected += len(failed)
        kept = [m for m in kept if m not in failed]
        if kept:
            classes[key] = kept + members[verify_cap:]
    survivors = [m for members in classes.values() for m in members]
    if normalize:
        for members in classes.values():
            rep = members[0]
            rep.subspace = isotropy_orbit_normalize(rep.subspace, bundle)
    unmatched = [k for k in classes if k not in known]
    return SearchResult(bundle.name, d, samples, seed, order, stats, survivors, classes,
                        unmatched, rejected)


# --- maximality -------------------------------------------------------------

@dataclass
class MaximalityReport:
    classes: List[dict]
    containments: List[Tuple[str, str]]
    angle_rule_holds: bool

    def to_json(self) -> dict:
        return {"classes": self.classes,
                "containments": [list(c) for c in self.containments],
                "maximal_dim2_holomorphic_dim3_lagrangian": self.angle_rule_holds}


def _class_name(members: List[Survivor]) -> str:
    rep = members[0]
    if rep.catalog_label:
        return rep.catalog_label
    return f"unmatched(dim={rep.fingerprint.dim})"


def maximality_analysis(results: Sequence[SearchResult], bundle: ModelSpaceBundle,
                        containment_limit: int = 64,
                        tol: Tolerance = DEFAULT_TOL) -> MaximalityReport:
    """Containments between found classes, maximal classes and the angle check.

    A class A sits below a class B if some survivor of A lies inside some
    survivor of B, or inside an image of one under the finite symmetries
    and isotropy sample.  At most ``containment_limit`` members per class
    are compared.
    """
    entries = []
    for res in results:
        for members in res.classes.values():
            entries.append(members)
    ops = [np.eye(bundle.space.dim_p)] + list(bundle.congruences) + list(bundle.isotropy_sample)
    below = set()
    for a, b in product(range(len(entries)), repeat=2):
        ea, eb = entries[a], entries[b]
        if ea[0].fingerprint.dim >= eb[0].fingerprint.dim:
            continue
        found = False
        for sa in ea[:containment_limit]:
            for sb in eb[:containment_limit]:
                for g in ops:
                    if subspace_contains(sa.subspace, Subspace(g @ sb.subspace.basis), tol):
                        found = True
                        break
                if found:
                    break
            if found:
                break
        if found:
            below.add((a, b))
    classes, angle_rule = [], True
    for i, members in enumerate(entries):
        fp = members[0].fingerprint
        maximal = not any(a == i for a, _ in below)
        classes.append({"label": _class_name(members), "dim": fp.dim, "maximal": maximal,
                        "kahler_angle": number(fp.kahler_angle)})
        if maximal and fp.kahler_angle is not None:
            if fp.dim == 2 and abs(fp.kahler_angle) > 1e-9:
                angle_rule = False
            if fp.dim == 3 and abs(fp.kahler_angle - math.pi / 2) > 1e-9:
                angle_rule = False
        if maximal and fp.kahler_angle is None and fp.dim in (2, 3):
            angle_rule = False
    cont = [(_class_name(entries[a]), _class_name(entries[b])) for a, b in sorted(below)]
    return MaximalityReport(classes, cont, angle_rule)


# --- table verification -----------------------------------------------------

@dataclass
class RowVerdict:
    label: str
    checks: Dict[str, Tuple[object, object, bool]]

    @property
    def passes(self) -> bool:
        return all(ok for _, _, ok in self.checks.values())

    def to_json(self) -> dict:
        def enc(x):
            if isinstance(x, float):
                return number(x)
            if isinstance(x, tuple):
                return [enc(a) for a in x]
            return x
        return {"label": self.label, "passes": self.passes,
                "checks": {k: {"expected": enc(e), "computed": enc(c), "ok": ok}
                           for k, (e, c, ok) in sorted(self.checks.items())}}


@dataclass
class TableReport:
    space: str
    rows: List[RowVerdict]
    sweeps: List[SweepStats] = field(default_factory=list)

    @property
    def passes(self) -> bool:
        return all(r.passes for r in self.rows) and all(s.clean for s in self.sweeps)

    def to_json(self) -> dict:
        return {"space": self.space, "passes": self.passes,
                "rows": [r.to_json() for r in self.rows],
                "sweeps": [s.to_json() for s in self.sweeps]}


EXCLUDED_DIMS = {"cp3": (4, 5), "flag": (4, 5), "s3s3": (4, 5)}


def verify_row(bundle: ModelSpaceBundle, cand: Candidate, order: int = DEFAULT_ORDER,
               seed: int = 0, tol: Tolerance = DEFAULT_TOL) -> RowVerdict:
    curv = bundle.curv
    v = cand.subspace
    checks: Dict[str, Tuple[object, object, bool]] = {}
    verdict = curv.tg_check(v, order, seed=seed)
    checks["totally_geodesic"] = (True, verdict.is_tg, verdict.is_tg)
    if cand.j_type is not None and bundle.nk is not None:
        jt = classify_J_type(v, bundle.nk, tol)
        checks["j_type"] = (cand.j_type, jt, jt == cand.j_type)
    if cand.well_positioned is not None:
        wp = curv.well_positioned_check(v).well_positioned
        checks["well_positioned"] = (cand.well_positioned, wp, wp == cand.well_positioned)
    if cand.d_invariant is not None:
        di = curv.d_residual(v) < tol.eps_zero
        checks["d_invariant"] = (cand.d_invariant, di, di == cand.d_invariant)
    if cand.sec is not None:
        spec = _spectrum(bundle, v, tol)
        ok = bool(np.all(np.abs(np.array(spec) - cand.sec) < 1e-9))
        checks["sectional_curvature"] = (float(cand.sec), tuple(spec), ok)
    if cand.berger is not None:
        try:
            p = berger_params_from_subspace(v, curv, tol)
            got = (p.r, p.tau)
            ok = abs(p.r - cand.berger[0]) < 1e-9 and abs(p.tau - cand.berger[1]) < 1e-9
        except NotBergerError:
            got, ok = None, False
        checks["berger"] = (tuple(float(a) for a in cand.berger), got, ok)
    if cand.lattice is not None:
        ok = verify_torus_lattice(bundle.name, cand.lattice, tol)
        checks["lattice"] = (True, ok, ok)
    return RowVerdict(cand.label, checks)


def verify_tables(names: Sequence[str] = NK_SPACES, order: int = DEFAULT_ORDER, seed: int = 0,
                  sweep_samples: int = 0, threads: Optional[int] = None,
                  tol: Tolerance = DEFAULT_TOL) -> List[TableReport]:
    """Check every catalog row and, if requested, sweep the excluded dimensions."""
    reports = []
    for name in names:
        bundle = build(name)
        rows = [verify_row(bundle, c, order, seed, tol) for c in bundle.candidates]
        sweeps = []
        if sweep_samples > 0:
            for d in EXCLUDED_DIMS[name]:
                sweeps.append(random_sweep(bundle, d, sweep_samples, seed, threads, tol)[0])
        reports.append(TableReport(name, rows, sweeps))
    return reports


# --- cones ------------------------------------------------------------------

@dataclass
class ConeReport:
    space: str
    subspaces: List[dict]
    scan: Optional[ScanReport]

    def to_json(self) -> dict:
        scan = None
        if self.scan is not None:
            s = self.scan
            scan = {"min_residual": round_sig(s.min_residual), "samples": s.samples,
                    "passing": s.passing, "families_found": s.families_found,
                    "radii": list(s.radii), "points_per_sphere": s.points_per_sphere,
                    "order": s.order, "note": s.note,
                    "scope": "tilted hyperplanes (d_r + eta)^perp; radial hyperplanes are "
                             "cones over base hypersurfaces and are not scanned"}
        return {"schema": SCHEMA_VERSION, "space": self.space, "cone_subspaces": self.subspaces,
                "hypersurface_scan": scan}


def _calibration_label(dim: int) -> Optional[str]:
    return {3: "associative (dimension rule)", 4: "coassociative (dimension rule)"}.get(dim)


def cone_report(bundle: ModelSpaceBundle, order: int = 2, scan: bool = True,
                points_per_sphere: int = 2000, tol: Tolerance = DEFAULT_TOL) -> ConeReport:
    """Cones over maximal catalog subspaces and the tilted hyperplane scan."""
    cone = ConeGeometry(bundle.curv, order, tol)
    subs = []
    for c in bundle.candidates:
        if not c.maximal:
            continue
        verdict = cone.cone_tg_check(c.subspace, include_radial=True, order=order)
        dim = c.subspace.dim + 1
        subs.append({"label": c.label, "cone_dim": dim, "totally_geodesic": verdict.is_tg,
                     "residual": round_sig(verdict.max_residual),
                     "calibration": _calibration_label(dim)})
    rep = None
    if scan:
        extra = [c.subspace.basis[:, 0] for c in bundle.candidates]
        rep = hypersurface_obstruction_scan(bundle.curv, points_per_sphere=points_per_sphere,
                                            order=order, extra_directions=extra, tol=tol)
    return ConeReport(bundle.name, subs, rep)
