"""Command-line interface.

Exit codes: 0 when every check passes, 1 on a verification mismatch,
2 on malformed input.  Mismatch details go to standard error.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import classify as cl
from .cones import cone_geodesic, integrate_cone_geodesic
from .errors import GeometryError, InputError, InternalConsistencyError, UnknownSpaceError
from .homgeo import CurvatureOperatorSet, DEFAULT_ORDER
from .liealg import load_space_definition
from .modelspaces import (NK_SPACES, ModelSpaceBundle, build, build_berger_sphere,
                          build_round_sphere)
from .nkstruct import build_J
from .numkernel import Subspace, Tolerance, orthonormalize, sym_eig

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2


# --- parsing helpers --------------------------------------------------------

_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Call,
                  ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Load)


def parse_vector(expr: str, n: int) -> np.ndarray:
    """Evaluate expressions such as ``e1 + sqrt3*e4`` or ``0.5*e2 - sqrt(2)*e3``.

    Names ``e1..en`` are basis vectors, ``sqrtK`` stands for sqrt(K), and
    ``sqrt`` and ``pi`` are available.  A comma separated list of n numbers
    is also accepted.
    """
    text = expr.strip()
    if "," in text and "e" not in text.replace("e-", "").replace("e+", ""):
        try:
            vals = [float(x) for x in text.split(",")]
        except ValueError as exc:
            raise InputError(f"cannot parse vector '{expr}'") from exc
        if len(vals) != n:
            raise InputError(f"vector '{expr}' has {len(vals)} entries, expected {n}")
        return np.array(vals)
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse vector expression '{expr}'") from exc
    env = {f"e{i + 1}": np.eye(n)[i] for i in range(n)}
    env.update({"sqrt": math.sqrt, "pi": math.pi})
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise InputError(f"unsupported syntax in '{expr}'")
        if isinstance(node, ast.Name) and node.id not in env:
            if node.id.startswith("sqrt") and node.id[4:].isdigit():
                env[node.id] = math.sqrt(int(node.id[4:]))
            else:
                raise InputError(f"unknown name '{node.id}' in '{expr}'")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name)
                                               and node.func.id == "sqrt"):
            raise InputError(f"only sqrt(...) calls are allowed in '{expr}'")
    try:
        val = eval(compile(tree, "<vector>", "eval"), {"__builtins__": {}}, env)
    except (ArithmeticError, ValueError, TypeError) as exc:
        raise InputError(f"cannot evaluate '{expr}': {exc}") from exc
    val = np.asarray(val, dtype=float)
    if val.shape != (n,):
        raise InputError(f"'{expr}' is not a vector of length {n}")
    return val


def resolve_space(spec: str, order: int, tol: Tolerance) -> ModelSpaceBundle:
    """cp3, flag, s3s3, sphere:N:R, berger:R:TAU or a space-definition JSON file."""
    if spec in NK_SPACES:
        return build(spec, order, tol)
    parts = spec.split(":")
    try:
        if parts[0] == "sphere" and len(parts) == 3:
            return build_round_sphere(int(parts[1]), float(parts[2]), order, tol)
        if parts[0] == "berger" and len(parts) == 3:
            return build_berger_sphere(float(parts[1]), float(parts[2]), order, tol)
    except ValueError as exc:
        raise InputError(f"bad space parameters in '{spec}'") from exc
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        doc = json.loads(path.read_text()) if path.exists() else None
        if doc is None:
            raise InputError(f"space definition '{spec}' not found")
        space = load_space_definition(doc, tol)
        nk = build_J(space, np.asarray(doc["theta"]), tol) if "theta" in doc else None
        return ModelSpaceBundle(space.name or path.stem, space,
                                CurvatureOperatorSet(space, order, tol), nk, [], [], [], [], [])
    raise UnknownSpaceError(f"unknown space '{spec}' (expected one of {', '.join(NK_SPACES)}, "
                            f"sphere:N:R, berger:R:TAU or a .json file)")


def _read_vectors(args, n: int) -> List[np.ndarray]:
    if args.inline:
        items = [x for x in args.inline.split(";") if x.strip()]
    elif args.vectors:
        try:
            text = Path(args.vectors).read_text()
        except OSError as exc:
            raise InputError(f"cannot read '{args.vectors}': {exc}") from exc
        items = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
    else:
        raise InputError("give --vectors FILE or --inline 'v1;v2;...'")
    return [parse_vector(x, n) for x in items]


# --- output -----------------------------------------------------------------

def _emit(args, doc: dict) -> None:
    doc = dict(doc)
    doc.setdefault("schema", cl.SCHEMA_VERSION)
    if args.json:
        Path(args.json).write_text(cl.to_json(doc))


def _fmt(x: float, zero: float = 1e-12) -> str:
    x = 0.0 if abs(x) < zero else x
    tag = cl.symbolic_tag(x)
    return f"{x:.12g}" + (f" ({tag})" if tag else "")


# --- subcommands ------------------------------------------------------------

def cmd_verify_tables(args, tol: Tolerance) -> int:
    names = NK_SPACES if args.space == "all" else (args.space,)
    for name in names:
        if name not in NK_SPACES:
            raise UnknownSpaceError(f"unknown space '{name}'")
    reports = cl.verify_tables(names, args.order, args.seed, args.sweep_samples,
                               args.threads, tol)
    code = EXIT_OK
    for rep in reports:
        for row in rep.rows:
            print(f"{rep.space:5s} {row.label:16s} {'PASS' if row.passes else 'FAIL'}")
            if not row.passes:
                code = EXIT_MISMATCH
                for key, (exp, got, ok) in row.checks.items():
                    if not ok:
                        print(f"mismatch {rep.space}/{row.label} {key}: expected {exp}, "
                              f"computed {got}", file=sys.stderr)
        for sw in rep.sweeps:
            print(f"{rep.space:5s} sweep d={sw.dim} samples={sw.samples} passes={sw.passes} "
                  f"min residual {sw.min_residual:.6g} {'CLEAN' if sw.clean else 'NOT CLEAN'}")
            if not sw.clean:
                code = EXIT_MISMATCH
                print(f"mismatch {rep.space} sweep d={sw.dim}: passes={sw.passes}, "
                      f"min residual {sw.min_residual:.3e}", file=sys.stderr)
    _emit(args, {"command": "verify-tables", "order": args.order, "seed": args.seed,
                 "reports": [r.to_json() for r in reports]})
    return code


def cmd_check_subspace(args, tol: Tolerance) -> int:
    bundle = resolve_space(args.space, args.order, tol)
    vecs = _read_vectors(args, bundle.space.dim_p)
    v = orthonormalize(vecs, tol)
    verdict = bundle.curv.tg_check(v, args.order, seed=args.seed)
    fp = cl.fingerprint(bundle, v, tol)
    print(f"dimension {v.dim}: {'totally geodesic' if verdict.is_tg else 'not totally geodesic'}"
          f" (max residual {verdict.max_residual:.3e}, exponential criterion "
          f"{verdict.tojo_residual:.3e})")
    if verdict.witness is not None:
        w = verdict.witness
        print(f"witness: order {w.order}, inputs {w.indices}, residual {w.residual:.3e}")
    print(f"D-invariant: {verdict.d_invariant}")
    if fp.kahler_type is not None:
        ang = "non-constant" if fp.kahler_angle is None else _fmt(fp.kahler_angle)
        print(f"J-type: {fp.kahler_type}, Kähler angle {ang}")
    if fp.sec_spectrum:
        print("curvature operator spectrum: " + ", ".join(_fmt(s) for s in fp.sec_spectrum))
    if fp.well_positioned is not None:
        print(f"well-positioned: {fp.well_positioned} (vertical dimension {fp.vertical_dim})")
    _emit(args, {"command": "check-subspace", "space": bundle.name,
                 "totally_geodesic": verdict.is_tg,
                 "max_residual": cl.round_sig(verdict.max_residual),
                 "order_residuals": [cl.round_sig(r) for r in verdict.order_residuals],
                 "fingerprint": fp.to_json()})
    if args.expect is not None and verdict.is_tg != (args.expect == "tg"):
        print(f"mismatch: expected {args.expect}, got "
              f"{'tg' if verdict.is_tg else 'not-tg'}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_spectra(args, tol: Tolerance) -> int:
    bundle = resolve_space(args.space, args.order, tol)
    x = parse_vector(args.direction, bundle.space.dim_p)
    curv = bundle.curv
    jac = sym_eig(curv.jacobi_operator(x), tol)
    print("Jacobi operator:")
    for es in jac:
        print(f"  {_fmt(es.value)}  multiplicity {es.space.dim}")
    cartan = []
    for j in range(1, args.order + 1):
        w = np.linalg.eigvals(curv.cartan_operator(j, x))
        w = sorted(w, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
        cartan.append(w)
        shown = ", ".join(_fmt(z.real) if abs(z.imag) < tol.eps_cluster
                          else f"{z.real:.9g}{z.imag:+.9g}i" for z in w)
        print(f"Cartan operator order {j}: {shown}")
    _emit(args, {"command": "spectra", "space": bundle.name, "direction": x.tolist(),
                 "jacobi": [{"value": cl.number(es.value), "multiplicity": es.space.dim}
                            for es in jac],
                 "cartan": [[{"re": cl.round_sig(z.real), "im": cl.round_sig(z.imag)} for z in w]
                            for w in cartan]})
    return EXIT_OK


def cmd_search(args, tol: Tolerance) -> int:
    bundle = resolve_space(args.space, args.order, tol)
    res = cl.search_tg_subspaces(bundle, args.dim, args.samples, args.seed, args.order,
                                 args.threads, normalize=args.normalize, tol=tol)
    print(f"{len(res.survivors)} totally geodesic subspaces found; "
          f"min residual {res.random_stats.min_residual:.6g}")
    for members in res.classes.values():
        rep = members[0]
        print(f"  class {rep.catalog_label or 'UNMATCHED'}: {len(members)} members, "
              f"spectrum {[round(s, 9) for s in rep.fingerprint.sec_spectrum]}, "
              f"{rep.fingerprint.kahler_type}")
    _emit(args, res.to_json())
    if res.unmatched and bundle.candidates:
        print(f"mismatch: {len(res.unmatched)} classes not in the catalog", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_cone(args, tol: Tolerance) -> int:
    bundle = resolve_space(args.space, args.order, tol)
    order = min(args.order, 2) if args.cone_order is None else args.cone_order
    rep = cl.cone_report(bundle, order, args.scan, args.points, tol)
    code = EXIT_OK
    for s in rep.subspaces:
        label = f" [{s['calibration']}]" if s["calibration"] else ""
        print(f"cone over {s['label']}: dimension {s['cone_dim']}, "
              f"{'totally geodesic' if s['totally_geodesic'] else 'NOT totally geodesic'}{label}")
        if not s["totally_geodesic"]:
            code = EXIT_MISMATCH
            print(f"mismatch: cone over {s['label']} fails (residual {s['residual']:.3e})",
                  file=sys.stderr)
    if rep.scan is not None:
        sc = rep.scan
        if sc.families_found:
            print(f"tilted hyperplane scan: {sc.passing} of {sc.samples} normals give totally "
                  f"geodesic hyperplanes")
        else:
            print(f"tilted hyperplane scan: none found over {sc.samples} normals; "
                  f"min residual {sc.min_residual:.6g}")
        print(f"note: {sc.note}")
    _emit(args, rep.to_json())
    return code


def cmd_geodesic(args, tol: Tolerance) -> int:
    bundle = resolve_space(args.space, args.order, tol)
    v = parse_vector(args.v, bundle.space.dim_p)
    if not args.cone:
        raise InputError("only cone geodesics are supported; pass --cone")
    g = cone_geodesic(args.tau, args.a, v)
    lo, hi = g.interval
    ts = np.linspace(-args.t_max, args.t_max, 11)
    ts = ts[(ts > lo) & (ts < hi)]
    print(f"rho(t) = sqrt(({args.a:g} t + {args.tau:g})^2 + {g.speed ** 2:.12g} "
          f"* {args.tau:g}^2 t^2)")
    print(f"maximal interval: ({lo:g}, {hi:g})")
    worst = 0.0
    for end in (ts.min(initial=0.0), ts.max(initial=0.0)):
        if end == 0.0:
            continue
        if g.speed == 0 and not (lo < end < hi):
            continue
        t, r, s = integrate_cone_geodesic(args.tau, args.a, g.speed, float(end))
        worst = max(worst, float(np.max(np.abs(r - g.rho(t)))),
                    float(np.max(np.abs(s - g.arc(t)))))
    for t in ts:
        print(f"  t={t:+.3f}  rho={float(g.rho(t)):.12g}  f={float(g.f(t)):.12g}")
    print(f"integrator agreement: {worst:.3e}")
    _emit(args, {"command": "geodesic", "space": bundle.name, "tau": args.tau, "a": args.a,
                 "v": v.tolist(), "interval": [lo, hi],
                 "samples": [{"t": cl.round_sig(float(t)), "rho": cl.round_sig(float(g.rho(t))),
                              "f": cl.round_sig(float(g.f(t)))} for t in ts],
                 "integrator_max_error": cl.round_sig(worst)})
    if worst > 1e-6:
        print(f"mismatch: closed form and integrator differ by {worst:.3e}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


# --- entry point ------------------------------------------------------------

def _common(suppress: bool) -> argparse.ArgumentParser:
    """Global flags; accepted before or after the subcommand."""
    def d(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=d(1e-9), help="residual threshold")
    common.add_argument("--cluster-tol", type=float, default=d(1e-7),
                        help="eigenvalue clustering threshold")
    common.add_argument("--order", type=int, default=d(DEFAULT_ORDER),
                        help="highest covariant derivative order K")
    common.add_argument("--threads", type=int, default=d(None),
                        help=f"worker threads (default from {cl.THREADS_ENV} or 1)")
    common.add_argument("--json", metavar="OUT", default=d(None), help="write a JSON report")
    common.add_argument("--seed", type=int, default=d(0))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common(suppress=True)
    p = argparse.ArgumentParser(prog="nkgeom", parents=[_common(suppress=False)],
                                description="Totally geodesic subspaces of homogeneous spaces "
                                            "and their cones.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify-tables", parents=[common], help="check the catalog")
    s.add_argument("--space", default="all", choices=("all",) + NK_SPACES)
    s.add_argument("--sweep-samples", type=int, default=0,
                   help="random subspaces per excluded dimension")
    s.set_defaults(func=cmd_verify_tables)

    s = sub.add_parser("check-subspace", parents=[common], help="test one subspace")
    s.add_argument("--space", required=True)
    s.add_argument("--vectors", help="file with one vector expression per line")
    s.add_argument("--inline", help="vectors separated by ';'")
    s.add_argument("--expect", choices=("tg", "not-tg"), default=None)
    s.set_defaults(func=cmd_check_subspace)

    s = sub.add_parser("spectra", parents=[common], help="Jacobi and Cartan eigendata")
    s.add_argument("--space", required=True)
    s.add_argument("--direction", required=True)
    s.set_defaults(func=cmd_spectra)

    s = sub.add_parser("search", parents=[common], help="randomized subspace search")
    s.add_argument("--space", required=True)
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--samples", type=int, default=10000)
    s.add_argument("--normalize", action="store_true",
                   help="move class representatives to canonical isotropy position")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("cone", parents=[common], help="cone subspaces and hyperplane scan")
    s.add_argument("--space", required=True)
    s.add_argument("--scan", action="store_true")
    s.add_argument("--points", type=int, default=2000, help="directions per sphere of the scan")
    s.add_argument("--cone-order", type=int, default=None)
    s.set_defaults(func=cmd_cone)

    s = sub.add_parser("geodesic", parents=[common], help="closed-form cone geodesic")
    s.add_argument("--space", required=True)
    s.add_argument("--cone", action="store_true")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--v", required=True)
    s.add_argument("--tau", type=float, default=1.0)
    s.add_argument("--t-max", type=float, default=5.0)
    s.set_defaults(func=cmd_geodesic)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = Tolerance(args.tol, args.cluster_tol)
        if args.order < 0:
            raise InputError("--order must be non-negative")
        return args.func(args, tol)
    except (InputError, UnknownSpaceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalConsistencyError as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
