"""Oracle calls needed to reach a target exploitability versus game size.

On random K x K games with row, column and interaction effects, doubles the
budget T until the median exploitability of the self-play row strategy (exact,
by linear programming) falls below the target, and fits the growth exponent of
the crossing budget in K.  Full Wald/Savage evaluation needs K*K calls.

    python3 scripts/cost_scaling.py --sizes 64,256,1024
"""

import argparse
import math
import sys

import numpy as np
from scipy.optimize import linprog

from snash.bandit import BanditConfig, self_play_nash
from snash.criteria import nash_value_upper_lower
from snash.game import MatrixGame


def structured_game(K, seed):
    rng = np.random.default_rng(seed)
    return (rng.uniform(size=(K, 1)) + rng.uniform(size=(1, K)) + rng.uniform(size=(K, K))) / 3


def game_value(a):
    K, S = a.shape
    c = np.zeros(K + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([-a.T, np.ones((S, 1))]), b_ub=np.zeros(S),
                  A_eq=np.r_[np.ones(K), 0.0][None, :], b_eq=[1.0],
                  bounds=[(0, None)] * K + [(None, None)], method="highs")
    return float(res.x[-1])


def crossing(a, target, seeds):
    v, game, K = game_value(a), MatrixGame(a), a.shape[0]
    T, prev = 16 * K, None
    while True:
        med = float(np.median([v - nash_value_upper_lower(a, self_play_nash(game, BanditConfig(horizon=T, seed=s)))[0]
                               for s in range(seeds)]))
        print(f"  K={K} T={T} median exploitability {med:.4f}", file=sys.stderr)
        if med <= target:
            if prev is None:
                return float(T)
            T0, m0 = prev
            return math.exp(math.log(T0) + (m0 - target) / (m0 - med) * math.log(T / T0))
        prev, T = (T, med), 2 * T


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64,256,1024")
    ap.add_argument("--target", type=float, default=0.1)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args(argv)
    sizes = [int(k) for k in args.sizes.split(",")]
    calls = [crossing(structured_game(K, K), args.target, args.seeds) for K in sizes]
    print("K,bandit_calls,full_evaluation_calls")
    for K, n in zip(sizes, calls):
        print(f"{K},{n:.0f},{K * K}")
    if len(sizes) > 1:
        slope = np.polyfit(np.log(sizes), np.log(calls), 1)[0]
        print(f"# fitted exponent {slope:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
