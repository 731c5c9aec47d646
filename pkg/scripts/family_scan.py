"""Discernability across the alpha parameter, inside and outside [theta, pi - theta]."""
import argparse
import csv
import math
import sys

import numpy as np

from qdiscern.discrimination import check_saturation, discernability, family_operator
from qdiscern.linalg import standard_pair


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--theta", type=float, nargs="+", default=[0.3, math.pi / 4, 1.2])
    ap.add_argument("--points", type=int, default=41)
    ap.add_argument("--dim", type=int, default=3)
    args = ap.parse_args()

    out = csv.writer(sys.stdout)
    out.writerow(["theta", "alpha", "in_range", "delta", "tan_theta", "shortfall", "saturated"])
    for theta in args.theta:
        pair = standard_pair(theta, args.dim)
        for alpha in np.linspace(0.0, math.pi, args.points):
            a = family_operator(pair, alpha)
            d = discernability(a, pair).delta
            if d is None:
                continue
            sat = check_saturation(a, pair).saturated
            out.writerow([theta, alpha, theta <= alpha <= math.pi - theta, d, math.tan(theta),
                          math.tan(theta) - d, sat])


if __name__ == "__main__":
    main()
