"""Phase-precision cost of optimizing jointly instead of for phase alone.

For each n, reports dphi(joint optimum) / dphi(phase optimum) - 1 at a fixed
eta. Writes results/phase_penalty_eta{eta}.csv.
"""

import argparse
import csv
from pathlib import Path

from phaseloss.fisher import qfi_matrix
from phaseloss.fock_core import make_probe
from phaseloss.optimizer import OptimizerSettings, optimize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", type=float, default=0.9)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5, 6, 8, 10, 15, 20, 30, 40, 50])
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"phase_penalty_eta{args.eta}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "I_phiphi_phase_opt", "I_phiphi_joint_opt", "penalty"])
        for n in args.n:
            phase = optimize(n, args.eta, OptimizerSettings(objective="phase_only")).objective
            joint = qfi_matrix(make_probe(optimize(n, args.eta, OptimizerSettings()).x), args.eta).phiphi
            penalty = (phase / joint) ** 0.5 - 1
            w.writerow([n, repr(phase), repr(joint), repr(penalty)])
            print(f"n={n:3d} penalty={penalty:.4f}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
