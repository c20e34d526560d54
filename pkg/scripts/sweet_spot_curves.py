#!/usr/bin/env python3
"""Sweet-spot curve driver: per-prefix cost v_i and the proxy score i*v_i.

For each seed, traces 2k seeding steps on a Gaussian mixture (or a delimited
dataset) and tabulates the normalized prefix cost and the sample-size proxy
i*v_i whose minimizer is the rough sweet spot. Clustered data should show an
interior minimizer; a structureless blob puts it at i = 1.

    python3 scripts/sweet_spot_curves.py --n 100000 --d 10 --k 20 --seeds 5
    python3 scripts/sweet_spot_curves.py --in data.csv --k 10 --out curves
"""

import argparse
import sys

import numpy as np

from one2all.bench import fig2_data
from one2all.data import gen_gmm, load_delimited


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--in", dest="inp", help="delimited dataset (default: generate)")
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--d", type=int, default=10)
    ap.add_argument("--k", type=int, required=True)
    ap.add_argument("--ell", type=int, default=None, help="trace length (default 2k)")
    ap.add_argument("--spacing", type=float, default=10.0)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--out", help="path prefix for per-seed TSV dumps")
    args = ap.parse_args(argv)

    curves = []
    for s in range(args.base_seed, args.base_seed + args.seeds):
        if args.inp:
            ds = load_delimited(args.inp)
        else:
            ds = gen_gmm(args.n, args.d, args.k, seed=s, spacing=args.spacing)
        out = fig2_data(ds, args.k, seed=s, ell=args.ell)
        curves.append(out)
        star = int(out["i"][np.argmin(out["overhead"])])
        print(f"seed {s}: sweet spot i*={star} "
              f"(cost ratio there {out['cost_ratio'][star - 1]:.4f})")
        if args.out:
            path = f"{args.out}-seed{s}.tsv"
            with open(path, "w") as f:
                f.write("i\tcost_ratio\toverhead\n")
                for i, c, o in zip(out["i"], out["cost_ratio"], out["overhead"]):
                    f.write(f"{int(i)}\t{float(c)!r}\t{float(o)!r}\n")
            print(f"  wrote {path}")

    # cross-seed medians, aligned on the shortest trace
    m = min(c["i"].size for c in curves)
    med_cost = np.median([c["cost_ratio"][:m] for c in curves], axis=0)
    med_over = np.median([c["overhead"][:m] for c in curves], axis=0)
    print("\ni\tmedian_cost_ratio\tmedian_overhead")
    for i in range(m):
        print(f"{i + 1}\t{med_cost[i]:.4f}\t{med_over[i]:.4f}")
    print(f"\nmedian curve sweet spot: i*={int(np.argmin(med_over)) + 1}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
