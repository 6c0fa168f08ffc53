"""Discretization error of the interval-pair extremizer as the line grid is refined.

For each step ``h`` the two interval indicators are convolved on a line grid and
``|lhs - rhs|`` is tabulated per test function. The error should fall roughly
linearly in ``h``.

    python scripts/tent_convergence.py --steps 0.04 0.02 0.01 0.005
"""

import argparse
import csv
import sys

from convlab import convex as cx
from convlab.groups import make_real_grid
from convlab.inequalities import check_main
from convlab.stepfn import indicator_interval

FUNCTIONS = {"square": cx.power(2.0), "entropy": cx.entropy(), "hinge0.3": cx.ft(0.3), "hinge0.5": cx.ft(0.5)}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=float, nargs="+", default=[0.04, 0.02, 0.01, 0.005])
    ap.add_argument("--I1", type=float, default=1.0)
    ap.add_argument("--I2", type=float, default=2.0)
    args = ap.parse_args(argv)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["h", "function", "lhs", "rhs", "abs_error", "error_over_h"])
    for h in args.steps:
        L = make_real_grid(h, args.I1 + args.I2)
        p1, p2 = indicator_interval(L, args.I1), indicator_interval(L, args.I2)
        for name, f in FUNCTIONS.items():
            if f.family == "entropy" and args.I1 > 1:
                continue
            rep = check_main(p1, p2, f, kernel="fft")
            err = abs(rep.rhs - rep.lhs)
            w.writerow([h, name, f"{rep.lhs:.10g}", f"{rep.rhs:.10g}", f"{err:.4e}", f"{err / h:.4f}"])


if __name__ == "__main__":
    main()
