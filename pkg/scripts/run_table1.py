#!/usr/bin/env python3
"""Benchmark-table driver: adaptive sample fractions vs the worst-case bound.

Runs the wrapper over a grid of Gaussian-mixture cells (the shipped presets
or a custom cell), repeats each cell over several seeds, and prints the
per-run summary table plus per-cell median aggregates. Use --out to keep
the raw per-run reports as JSON lines.

    python3 scripts/run_table1.py --preset table1-small --reps 3
    python3 scripts/run_table1.py --n 500000 --d 10 --k 5 --eps 0.1 --eps 0.2 --reps 10
"""

import argparse
import json
import sys

from one2all import bench


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", choices=sorted(bench.PRESETS))
    ap.add_argument("--n", type=int)
    ap.add_argument("--d", type=int)
    ap.add_argument("--k", type=int)
    ap.add_argument("--eps", type=float, action="append")
    ap.add_argument("--spacing", type=float, default=10.0)
    ap.add_argument("--reps", type=int, default=10, help="seeds per cell")
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--copies", type=int, default=1)
    ap.add_argument("--out", help="JSONL path for raw per-run reports")
    args = ap.parse_args(argv)

    if args.preset:
        cells = bench.PRESETS[args.preset]
    elif args.n and args.d and args.k and args.eps:
        cells = [
            {"n": args.n, "d": args.d, "k": args.k, "eps": e, "spacing": args.spacing}
            for e in args.eps
        ]
    else:
        ap.error("need --preset or all of --n --d --k --eps")

    reports, aggregates = bench.run_grid(
        cells, repetitions=args.reps, base_seed=args.base_seed, copies=args.copies
    )
    print(bench.summary_table([r for r in reports if isinstance(r, bench.RunReport)]))
    print()
    for agg in aggregates:
        print(json.dumps(agg, sort_keys=True))
    failures = [r for r in reports if not isinstance(r, bench.RunReport)]
    for f in failures:
        print(f"[failed] {json.dumps(f, sort_keys=True)}", file=sys.stderr)
    if args.out:
        with open(args.out, "w") as f:
            for r in reports:
                f.write((r.to_json() if isinstance(r, bench.RunReport)
                         else json.dumps(r, sort_keys=True)) + "\n")
        print(f"\nwrote {len(reports)} reports to {args.out}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
