"""Discretely sampled fair strike against the number of sampling dates.

    python scripts/convergence_in_n.py [--out FILE] [--periods 4,12,52,252,1000,2000]
"""

import argparse
import time

from _csvout import write_csv
from varswap import SwapContract, continuous_limit_reference, fair_strike, reference_params


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--periods", default="4,12,52,252,1000,2000")
    ap.add_argument("--maturity", type=float, default=1.0)
    ap.add_argument("--out")
    args = ap.parse_args()
    p = reference_params(maturity=args.maturity)
    rows = []
    for n in (int(x) for x in args.periods.split(",")):
        c = SwapContract(args.maturity, n)
        t0 = time.perf_counter()
        res = fair_strike(c, p)
        rows.append([n, res.strike, res.error_estimate, continuous_limit_reference(c, p),
                     time.perf_counter() - t0])
    write_csv("convergence", ["periods[count]", "strike[log-return^2]", "step_error[log-return^2]",
                              "continuous[log-return^2]", "runtime[s]"], rows, args.out)


if __name__ == "__main__":
    main()
