"""Expected equity premium over time for several risk-aversion levels.

    python scripts/premium_curves.py [--varthetas 1.5,2,3] [--out FILE]
"""

import argparse

import numpy as np

from _csvout import write_csv
from varswap import RiskPrices, expected_premium, premium_example


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--varthetas", default="1.5,2,3")
    ap.add_argument("--t-max", type=float, default=5.0)
    ap.add_argument("--points", type=int, default=101)
    ap.add_argument("--out")
    args = ap.parse_args()
    p = premium_example()
    t = np.linspace(0.0, args.t_max, args.points)
    rows = []
    for v in (float(x) for x in args.varthetas.split(",")):
        for ti, val in zip(t, expected_premium(t, p, RiskPrices(vartheta=v, delta=0.1))):
            rows.append([v, ti, val])
    write_csv("premium-curves", ["vartheta[1]", "t[yr]", "premium[1/yr]"], rows, args.out)


if __name__ == "__main__":
    main()
