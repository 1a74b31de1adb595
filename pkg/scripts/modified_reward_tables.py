"""Robust score and proxy exploitability under the modified reward R'.

Sweeps the bonus weight c on the normalized modified power game and reports,
for each c, the untruncated and truncated cohorts side by side.

    python3 scripts/modified_reward_tables.py --c 1,10 --T mult:10
"""

import argparse
import sys

from snash.harness import ExperimentConfig, parse_alpha, run_experiment


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", default="1,10", help="comma list of bonus weights")
    ap.add_argument("--T", default="mult:10")
    ap.add_argument("--alpha", default="none,0.3,0.5,0.7,0.9")
    ap.add_argument("--learnings", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rprime-neq-as-eq", action="store_true")
    args = ap.parse_args(argv)
    alphas = tuple(parse_alpha(a) for a in args.alpha.split(","))
    print("c,alpha,T,sparsity_mean,robust_mean,robust_sd,proxy_exploitability")
    for c in (float(x) for x in args.c.split(",")):
        cfg = ExperimentConfig(game="power-modified", c=c, normalize=True, horizons=(args.T,),
                               alphas=alphas, learnings=args.learnings, seed=args.seed,
                               neq_as_eq=args.rprime_neq_as_eq)
        for cell in run_experiment(cfg).cells:
            alpha = "none" if cell.alpha is None else cell.alpha
            print(f"{c:g},{alpha},{cell.T},{cell.sparsity_mean:.2f},{cell.robust_mean:.6f},"
                  f"{cell.robust_sd:.6f},{cell.proxy_exploitability:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
