"""Joint-optimal weights for large photon numbers at one eta.

Writes results/large_n_weights_eta{eta}.csv with columns n, k, x_k and prints
timings per n.
"""

import argparse
import csv
import time
from pathlib import Path

from phaseloss.optimizer import OptimizerSettings, optimize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", type=float, default=0.5)
    ap.add_argument("--n", type=int, nargs="+", default=[25, 50, 100, 200])
    ap.add_argument("--multistart", type=int, default=16)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"large_n_weights_eta{args.eta}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "k", "x_k"])
        for n in args.n:
            t0 = time.perf_counter()
            res = optimize(n, args.eta, OptimizerSettings(multistart=args.multistart))
            for k, x in enumerate(res.x):
                w.writerow([n, k, repr(float(x))])
            print(f"n={n:4d} delta={res.objective:.10f} converged={res.converged} {time.perf_counter() - t0:.1f} s")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
