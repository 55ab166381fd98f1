"""Search every space at every dimension and write the classes and maximality report."""

import argparse
import json
import time
from pathlib import Path

from nkgeom import classify as cl
from nkgeom.modelspaces import NK_SPACES, build


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default="results/search_all.json")
    args = ap.parse_args()

    doc = {"schema": cl.SCHEMA_VERSION, "samples": args.samples, "seed": args.seed, "spaces": {}}
    for name in NK_SPACES:
        bundle = build(name)
        results = []
        for d in range(2, 6):
            start = time.time()
            res = cl.search_tg_subspaces(bundle, d, args.samples, args.seed, threads=args.threads)
            results.append(res)
            print(f"{name} d={d}: classes {res.class_labels()} "
                  f"min random residual {res.random_stats.min_residual:.3g} "
                  f"({time.time() - start:.1f}s)")
        rep = cl.maximality_analysis(results, bundle)
        print(f"{name}: containments {rep.containments}, angle rule {rep.angle_rule_holds}")
        doc["spaces"][name] = {"searches": [r.to_json() for r in results],
                               "maximality": rep.to_json()}
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(cl.to_json(doc))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
