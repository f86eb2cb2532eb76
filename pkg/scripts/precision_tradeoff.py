"""Combined precision of the library probes and both optima across eta.

Writes results/precision_tradeoff_n{n}.csv with the phase, loss and total
uncertainties for noon, Holland-Burnett, phase-optimal and joint-optimal probes.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from phaseloss.optimizer import OptimizerSettings, evaluate_weights, optimize
from phaseloss.probes import holland_burnett, noon


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--points", type=int, default=49)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    etas = np.linspace(0.02, 0.98, args.points)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"precision_tradeoff_n{args.n}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eta", "probe", "I_phiphi", "I_etaeta_measured", "delta_phi", "delta_eta", "delta"])
        for eta in etas:
            eta = float(eta)
            candidates = {
                "noon": noon(args.n).weights,
                "phase_opt": optimize(args.n, eta, OptimizerSettings(objective="phase_only")).x,
                "joint_opt": optimize(args.n, eta, OptimizerSettings()).x,
            }
            if args.n % 2 == 0:
                candidates["hb"] = holland_burnett(args.n).weights
            for label, x in candidates.items():
                r = evaluate_weights(x, eta)
                w.writerow([repr(eta), label] + [repr(float(v)) for v in (r.i_phi, r.i_eta_measured, r.delta_phi, r.delta_eta, r.delta)])
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
