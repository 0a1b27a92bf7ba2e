#!/usr/bin/env python3
"""Time the two charge-solver variants on the default bias grid.

Prints per-stage medians, throughput and the variant ratios; pass a
smaller --n for a quick look (>= 1e5 recommended for stable numbers).
"""

import argparse

from synapsim.bench import bench_model_eval


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()

    r = bench_model_eval(n=args.n, reps=args.reps)
    print(f"grid: {r.n} points, median of {r.reps} interleaved repetitions")
    for v in ("reference", "householder"):
        print(f"  {v:11s} solver {r.solver_s[v]*1e3:9.2f} ms   "
              f"complete eval {r.eval_s[v]*1e3:9.2f} ms   "
              f"{r.evals_per_s[v]:12.0f} evals/s   "
              f"(rep spread {r.eval_spread[v]:.1%})")
    print(f"solver-stage ratio reference/householder: {r.solver_ratio:.1f}x")
    print(f"complete-eval ratio reference/householder: {r.eval_ratio:.2f}x")


if __name__ == "__main__":
    main()
