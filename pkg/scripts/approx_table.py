"""Uniform error of the piecewise-linear approximation ``f_(n)`` per function and ``n``.

The last column is the ratio to the previous row's error; ``1/n`` decay shows
up as 2 per doubling, ``1/sqrt(n)`` as about 1.41.

    python scripts/approx_table.py
"""

import argparse
import csv
import sys

import numpy as np

from convlab import convex as cx

FUNCTIONS = {"y^2": cx.power(2.0), "y log y": cx.entropy(), "-sqrt y": cx.negpower(0.5), "f_0.3": cx.ft(0.3)}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64, 128, 256])
    ap.add_argument("--points", type=int, default=1025)
    args = ap.parse_args(argv)
    y = np.linspace(0, 1, args.points)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["function", "n", "max_gap", "argmax_y", "ratio"])
    for name, f in FUNCTIONS.items():
        prev = None
        for n in args.n:
            g = cx.pl_approx(f, n, y) - f(y)
            k = int(np.argmax(g))
            ratio = "" if prev is None or g[k] == 0 else f"{prev / g[k]:.3f}"
            w.writerow([name, n, f"{g[k]:.6e}", f"{y[k]:.6f}", ratio])
            prev = g[k]


if __name__ == "__main__":
    main()
