"""Gap between the extremal search and the envelope ``(1-t)(I-t)`` on a line grid.

    python scripts/gap_curve.py --t 0 0.25 0.5 --budget 2000 > gap.csv
"""

import argparse
import sys

import numpy as np

from convlab.extremal import SContext, gap_curve, rows_to_csv
from convlab.groups import make_real_grid
from convlab.stepfn import indicator_interval


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--t", type=float, nargs="+", default=[0.0, 0.25, 0.5])
    ap.add_argument("--masses", type=int, default=16, help="number of I values in (0, 2]")
    ap.add_argument("--budget", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    L = make_real_grid(args.h, 3.0)
    phi1 = indicator_interval(L, 1.0)
    grid = np.linspace(2.0 / args.masses, 2.0, args.masses)
    rows = []
    for t in args.t:
        for row in gap_curve(SContext(phi1, t), grid, args.budget, args.seed, args.threads):
            rows.append({"t": t, **row})
    sys.stdout.write(rows_to_csv(rows, ["t", "I", "S_hat", "bound", "gap", "budget", "seed"]))


if __name__ == "__main__":
    main()
