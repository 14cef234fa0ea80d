"""Uplink phase-noise numbers versus M for Wiener noise (nats).

Columns: CLO value, SLO lower bound (innovation posterior and the
Gaussian-approximation chain), SLO upper bound.  Shows the 0.5 ln M
diversity gain and where the chain stops being a valid bound.
"""

import argparse
import math

from phasenoise.capacity import ChannelSpec, EstimatorConfig, pnn_ul_clo, pnn_ul_slo
from phasenoise.models import Wiener


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sigma-deg", type=float, nargs="+", default=[6.0, 30.0, 90.0])
    parser.add_argument("--M", type=int, nargs="+", default=[1, 2, 4, 8, 16])
    parser.add_argument("--n", type=int, default=20_000)
    args = parser.parse_args()

    print("sigma_deg,M,chi_clo_nats,chi_slo_lower_nats,chi_slo_chain_gauss_nats,chi_slo_upper_nats")
    for deg in args.sigma_deg:
        model = Wiener(math.radians(deg))
        for M in args.M:
            h = [1.0] * M
            clo = pnn_ul_clo(ChannelSpec("uplink", "clo", h, model)).chi_exact
            slo = pnn_ul_slo(ChannelSpec("uplink", "slo", h, model), estimator=EstimatorConfig(args.n))
            try:
                chain = pnn_ul_slo(ChannelSpec("uplink", "slo", h, model), lower="chain",
                                   entropy_method="gaussian_approx").chi_lower
            except ValueError:
                chain = float("nan")
            print(f"{deg:g},{M},{clo:.5f},{slo.chi_lower:.5f},{chain:.5f},{slo.chi_upper:.5f}")


if __name__ == "__main__":
    main()
