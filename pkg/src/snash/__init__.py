"""Sparse Nash equilibria for decision making under uncertainty.

Exp3.P self-play between a decision maker and Nature, truncation of the
empirical play frequencies into a small set of recommended policies, classical
decision criteria for comparison, and a synthetic power-investment benchmark.
"""

from .bandit import BanditConfig, NashApproximation, exp3p_init, exp3p_update, run_exp3p, self_play_nash, theoretical_params
from .criteria import (
    exact_nash_small,
    exploitability,
    nash_value_upper_lower,
    proxy_exploitability,
    regret_matrix,
    robust_score,
    savage,
    wald,
)
from .errors import ConfigError, NumericError, SNashError
from .game import (
    CallableGame,
    MatrixGame,
    RewardMatrix,
    RewardOracle,
    decode_ternary,
    encode_ternary,
    load_csv_matrix,
    make_strategy,
    normalize_matrix,
)
from .power import PowerGame, PowerModelConfig, base_reward, base_reward_core, modified_reward
from .sparsify import DecisionReport, TruncationConfig, snash, texp3p, truncate

__version__ = "0.1.0"
