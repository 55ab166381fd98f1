"""Tilted hyperplane scans over the model spaces, Berger spheres and round spheres."""

import argparse
import math
from pathlib import Path

from nkgeom import classify as cl
from nkgeom.cones import hypersurface_obstruction_scan
from nkgeom.modelspaces import NK_SPACES, build, build_berger_sphere, build_round_sphere

BERGER = [(2.0, 0.5), (math.sqrt(2), 0.25), (2.0, 1 / 3), (2.0, 4.0), (1.0, 1.0), (1.0, 0.5)]
SPHERES = [0.5, 1.0, 2.0]


def row(label, rep):
    print(f"{label:22s} min {rep.min_residual:10.4g}  passing {rep.passing:6d}/{rep.samples}")
    return {"base": label, "min_residual": cl.round_sig(rep.min_residual),
            "argmin_eta": [cl.round_sig(a) for a in rep.argmin_eta], "passing": rep.passing,
            "samples": rep.samples, "families_found": rep.families_found}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--order", type=int, default=2)
    ap.add_argument("--out", default="results/cone_scans.json")
    args = ap.parse_args()

    rows = []
    for name in NK_SPACES:
        b = build(name)
        extra = [c.subspace.basis[:, 0] for c in b.candidates]
        rows.append(row(name, hypersurface_obstruction_scan(
            b.curv, points_per_sphere=args.points, order=args.order, extra_directions=extra)))
    for r, tau in BERGER:
        rows.append(row(f"berger({r:.4g},{tau:.4g})", hypersurface_obstruction_scan(
            build_berger_sphere(r, tau).curv, points_per_sphere=args.points, order=args.order)))
    for r in SPHERES:
        rows.append(row(f"sphere3({r:g})", hypersurface_obstruction_scan(
            build_round_sphere(3, r).curv, points_per_sphere=args.points, order=args.order)))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(cl.to_json({"schema": cl.SCHEMA_VERSION, "points_per_sphere": args.points,
                               "order": args.order, "scans": rows}))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
