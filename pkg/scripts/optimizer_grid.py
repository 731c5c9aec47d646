"""Run the derivative-free search for max delta over a grid of angles.

Reports the best value found against tan(theta), plus the structural
residuals of the maximizer (how far it is from stabilizing span{v, w}).
"""
import argparse
import csv
import math
import sys
import time

import numpy as np

from qdiscern.discrimination import check_saturation
from qdiscern.linalg import standard_pair
from qdiscern.optimizer import SearchConfig, maximize_delta


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=15)
    ap.add_argument("--lo", type=float, default=0.05)
    ap.add_argument("--hi", type=float, default=1.52)
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = csv.writer(sys.stdout)
    out.writerow(["theta", "dim", "best_value", "tan_theta", "shortfall", "converged",
                  "subspace_residual", "evaluations", "seconds"])
    for theta in np.linspace(args.lo, args.hi, args.points):
        for dim in args.dims:
            t0 = time.perf_counter()
            pair = standard_pair(theta, dim)
            res = maximize_delta(pair, dim, SearchConfig(restarts=args.restarts, seed=args.seed))
            rep = check_saturation(res.best_operator, pair, tol=1e-2)
            out.writerow([theta, dim, res.best_value, math.tan(theta),
                          math.tan(theta) - res.best_value, res.converged,
                          f"{rep.subspace_residual:.3g}", res.evaluations,
                          f"{time.perf_counter() - t0:.2f}"])
            sys.stdout.flush()


if __name__ == "__main__":
    main()
