"""Optimal probe weights at n = 6 over an eta grid, joint and phase-only objectives.

Writes results/optimal_weights_n6.csv with one row per (objective, eta).
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from phaseloss.optimizer import OptimizerSettings, optimize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--etas", type=float, nargs="+", default=[round(0.1 * i, 1) for i in range(1, 10)])
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"optimal_weights_n{args.n}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["objective", "eta"] + [f"x_{k}" for k in range(args.n + 1)])
        for objective in ("joint_delta", "phase_only"):
            for eta in args.etas:
                res = optimize(args.n, eta, OptimizerSettings(objective=objective))
                w.writerow([objective, eta] + [repr(float(v)) for v in res.x])
                print(f"{objective:12s} eta={eta:.2f} x={np.round(res.x, 3)}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
