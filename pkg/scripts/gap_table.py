"""CLO-minus-SLO downlink outage-rate gap versus the number of antennas."""

import argparse
import csv
import sys

from phasenoise.capacity import SnrSpec
from phasenoise.outage import gap_vs_M


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epsilon", type=float, default=0.1)
    parser.add_argument("--M", type=int, nargs="+", default=[1, 2, 3, 5, 10, 20, 50, 100])
    parser.add_argument("--n", type=int, default=500_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=4)
    args = parser.parse_args()

    rows = gap_vs_M(args.epsilon, args.M, snr=SnrSpec.from_db(20.0), n_samples=args.n, seed=args.seed,
                    workers=args.workers)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["M", "delta_R_analytic_bits", "delta_R_mc_6deg_bits", "ci_bits", "delta_R_mc_2deg_bits", "ci_alt_bits"])
    for r in rows:
        writer.writerow([r.M, f"{r.delta_r_analytic:.5f}", f"{r.delta_r_mc:.5f}", f"{r.ci:.5f}",
                         f"{r.delta_r_mc_alt:.5f}", f"{r.ci_alt:.5f}"])


if __name__ == "__main__":
    main()
