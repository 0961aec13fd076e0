#!/usr/bin/env python3
"""Export theoretical-vs-empirical quantile pairs for a preset scenario.

Replicates the scenario, pairs the sorted statistics with reference
quantiles, and writes a two-column CSV suitable for a Q-Q plot.  The
reference defaults to the law the regime dispatch selects (chi-square
surrogate with df = r in the growing regime).
"""

import argparse
import csv
import math
import sys

from pairlrt import lrt
from pairlrt import montecarlo as mc


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="H04", choices=mc.PRESETS, help="scenario preset")
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--r", type=int, help="leading block size (preset default if omitted)")
    ap.add_argument("--L", type=float, help="profile height; -1 means 0.2*log(n)")
    ap.add_argument("--c", type=float, help="signal strength for power presets")
    ap.add_argument("--k", type=int, help="comparisons per pair for bt designs")
    ap.add_argument("--values", help="comma-separated specified head values (H03)")
    ap.add_argument("--model", choices=("beta", "bt"), help="override the preset's model")
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--reference", help="chi2:<df> or normal (default follows the dispatch)")
    ap.add_argument("--out", help="output CSV path (default stdout)")
    args = ap.parse_args(argv)

    params = {"n": args.n, "reps": args.reps, "seed": args.seed}
    if args.r is not None:
        params["r"] = args.r
    if args.L is not None:
        params["L"] = args.L if args.L >= 0 else 0.2 * math.log(args.n)
    if args.c is not None:
        params["c"] = args.c
    if args.k is not None:
        params["k"] = args.k
    if args.values:
        params["values"] = [float(x) for x in args.values.split(",")]
    if args.model:
        params["model"] = args.model
    scenario = mc.build_scenario(args.preset, **params)

    reference = None
    if args.reference:
        if args.reference.startswith("chi2:"):
            reference = lrt.ChiSquare(int(args.reference.split(":", 1)[1]))
        elif args.reference == "normal":
            reference = lrt.NormalizedGaussian()
        else:
            ap.error(f"unrecognized reference {args.reference!r}")

    pairs = mc.qq_data(scenario, reference, workers=args.workers)

    sink = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(sink)
        writer.writerow(["theoretical", "empirical"])
        writer.writerows(pairs.tolist())
    finally:
        if args.out:
            sink.close()


if __name__ == "__main__":
    main()
