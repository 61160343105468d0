"""Fair strike as the long-run rate level beta varies, other inputs fixed.

    python scripts/beta_sweep.py [--betas 0.01,0.03,0.05,0.07,0.09] [--out FILE]
"""

import argparse

from _csvout import write_csv
from varswap import SwapContract, fair_strike, reference_params


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--betas", default="0.01,0.03,0.05,0.07,0.09")
    ap.add_argument("--periods", type=int, default=252)
    ap.add_argument("--out")
    args = ap.parse_args()
    c = SwapContract(1.0, args.periods)
    rows = []
    for beta in (float(x) for x in args.betas.split(",")):
        rows.append([beta, fair_strike(c, reference_params(beta=beta)).strike])
    write_csv("beta-sweep", ["beta_q[1/yr]", "strike[log-return^2]"], rows, args.out)


if __name__ == "__main__":
    main()
