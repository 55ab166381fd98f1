"""Random sweeps at the dimensions without totally geodesic subspaces."""

import argparse
from pathlib import Path

from nkgeom import classify as cl
from nkgeom.modelspaces import NK_SPACES, build


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default="results/negative_sweeps.json")
    args = ap.parse_args()

    sweeps = []
    for name in NK_SPACES:
        bundle = build(name)
        for d in cl.EXCLUDED_DIMS[name]:
            stats, _ = cl.random_sweep(bundle, d, args.samples, args.seed, args.threads)
            print(f"{name} d={d}: passes {stats.passes}, min residual {stats.min_residual:.4g}, "
                  f"{'clean' if stats.clean else 'NOT clean'}")
            sweeps.append({"space": name, **stats.to_json()})
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(cl.to_json({"schema": cl.SCHEMA_VERSION, "seed": args.seed, "sweeps": sweeps}))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
