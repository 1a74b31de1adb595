"""Sparsity / reward grid on the power-system game (theoretical parameters).

Runs one learning cohort per horizon and evaluates every truncation exponent on
it, then prints the table and writes the full report.  The default grid
(T = 2048*ceil(K/10), 10 learnings) takes about four minutes on one core;
``--quick`` uses T = 8*ceil(K/10).

    python3 scripts/reproduce_sparsity_table.py --dest sparsity.json
"""

import argparse
import sys

from snash.cli import main

ALPHAS = "none,0.1,0.3,0.5,0.7,0.9"


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--learnings", default="10")
    ap.add_argument("--seed", default="0")
    ap.add_argument("--dest", default="-")
    ap.add_argument("--out", default="csv", choices=("json", "csv"))
    args = ap.parse_args(argv)
    horizon = "mult:8" if args.quick else "mult:2048"
    return main(["experiment", "--game", "power", "--params", "theoretical", "--T", horizon,
                 "--alpha", ALPHAS, "--learnings", args.learnings, "--seed", args.seed,
                 "--out", args.out, "--dest", args.dest, "--progress"])


if __name__ == "__main__":
    sys.exit(run())
