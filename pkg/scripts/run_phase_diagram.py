"""Phase-transition experiment: success rates over (f_r, f_m) cells.

Writes one CSV row per (cell, method). Plotting is left to external tools;
the CSV columns are f_r, f_m, method, success_rate, mean_log10_rmse, trials.
"""

import argparse
import sys
import time

from sirmc import bench

PRESETS = {
    "paper": (bench.PAPER_GRID, bench.PAPER_GRID),
    "broad": (bench.BROAD_GRID, bench.BROAD_GRID),
    "transition": (bench.TRANSITION_FR, bench.TRANSITION_FM),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", choices=sorted(PRESETS), default="transition")
    ap.add_argument("--methods", default="nnm,how,hoc,hog")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--m", type=int, default=300)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--mu", type=float, default=1.05)
    ap.add_argument("--max-iters", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="phase_diagram.csv")
    args = ap.parse_args()

    fr_values, fm_values = PRESETS[args.preset]
    methods = tuple(args.methods.split(","))
    configs = {m: bench.config_for_method(m, mu=args.mu, max_iters=args.max_iters)
               for m in methods}
    t0 = time.time()
    grid = bench.phase_sweep(fr_values, fm_values, methods, args.trials,
                             m=args.m, n=args.n, seed=args.seed,
                             configs=configs, threads=args.threads)
    grid.to_csv(args.out)
    print(f"wrote {args.out} in {time.time() - t0:.0f}s", file=sys.stderr)
    for method in methods:
        print(f"{method}: {grid.success_cells(method)} cells with success rate >= 0.5",
              file=sys.stderr)


if __name__ == "__main__":
    main()
