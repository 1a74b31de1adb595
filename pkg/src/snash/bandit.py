"""Exp3.P and two-bandit self-play.

The reference recurrence (:func:`exp3p_init`, :func:`exp3p_step`) works on
immutable states and costs ``O(K)`` per step.  :func:`self_play_nash` uses a
compiled loop for matrix and power games and falls back to the reference
recurrence for arbitrary Python oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import (
    ConfigError,
    DegenerateMatrixError,
    NumericOverflowError,
    ParameterError,
    RewardRangeError,
)
from .game import MixedStrategy, RewardOracle, make_strategy

PRACTICAL_ETA = 0.3
PRACTICAL_GAMMA = 0.15
MAX_LOG_WEIGHT = math.log(1e300)
AUTO_EXACT_ARMS = 256


def theoretical_params(K: int, T: int, epsilon: float = 1e-6) -> tuple[float, float]:
    """``eta = 2 sqrt(log(KT/eps))``, ``gamma = min(0.6, 2 sqrt(3 K log K / (5 T)))``.

    Natural logarithms throughout.
    """
    if K < 2 or T < 1 or not epsilon > 0:
        raise ConfigError("theoretical parametrization needs K >= 2, T >= 1, epsilon > 0")
    ratio = K * T / epsilon
    if ratio <= 1:
        raise ConfigError(f"K*T/epsilon = {ratio!r} <= 1 makes eta undefined")
    eta = 2.0 * math.sqrt(math.log(ratio))
    gamma = min(0.6, 2.0 * math.sqrt(3.0 * K * math.log(K) / (5.0 * T)))
    return eta, gamma


@dataclass(frozen=True)
class BanditConfig:
    """Exp3.P settings shared by both sides of a self-play run.

    With ``parametrization="theoretical"`` each side derives ``eta`` and
    ``gamma`` from its own arm count; explicit ``eta``/``gamma`` override both
    parametrizations.  ``bonus_period`` controls how often the all-arm
    exploration bonus is folded into the weights (1 = every step; ``None``
    picks 1 up to 256 arms and ``ceil(K / 64)`` above).
    """

    horizon: int
    parametrization: str = "practical"
    epsilon: float = 1e-6
    seed: int = 0
    eta: Optional[float] = None
    gamma: Optional[float] = None
    bonus_period: Optional[int] = None

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ConfigError("horizon must be a positive integer")
        if self.parametrization not in ("practical", "theoretical"):
            raise ConfigError(f"unknown parametrization {self.parametrization!r}")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.gamma is not None and not 0 < self.gamma <= 1:
            raise ConfigError("gamma must lie in (0, 1]")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError("eta must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.bonus_period is not None and self.bonus_period < 1:
            raise ConfigError("bonus_period must be >= 1")

    def params_for(self, num_arms: int) -> tuple[float, float]:
        """``(eta, gamma)`` for a bandit over ``num_arms`` arms."""
        if self.parametrization == "practical":
            eta, gamma = PRACTICAL_ETA, PRACTICAL_GAMMA
        elif num_arms >= 2:
            eta, gamma = theoretical_params(num_arms, self.horizon, self.epsilon)
        else:
            # A single arm is always played; gamma has no effect.
            eta, gamma = 2.0 * math.sqrt(max(math.log(self.horizon / self.epsilon), 0.0)), 1.0
        return (self.eta if self.eta is not None else eta,
                self.gamma if self.gamma is not None else gamma)

    def period_for(self, num_arms: int) -> int:
        if self.bonus_period is not None:
            return self.bonus_period
        return 1 if num_arms <= AUTO_EXACT_ARMS else math.ceil(num_arms / 64)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class Exp3PState:
    """Exp3.P state; weights are stored as logarithms to survive long horizons."""

    log_weights: np.ndarray
    probs: MixedStrategy
    counts: np.ndarray
    t: int
    eta: float
    gamma: float
    horizon: int

    @property
    def num_arms(self) -> int:
        return self.log_weights.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)


def _probs(log_weights: np.ndarray, gamma: float) -> np.ndarray:
    w = np.exp(log_weights - log_weights.max())
    return (1.0 - gamma) * w / w.sum() + gamma / log_weights.shape[0]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _initial_log_weight(K: int, T: int, eta: float, gamma: float) -> float:
    arg = eta * gamma / 3.0 * math.sqrt(T / K)
    if not arg <= MAX_LOG_WEIGHT:
        raise ParameterError(
            f"initial weight exp({arg:.6g}) overflows (eta={eta}, gamma={gamma}, T={T}, K={K})"
        )
    return arg


def exp3p_init(K: int, cfg: BanditConfig) -> Exp3PState:
    """All weights ``exp((eta gamma / 3) sqrt(T / K))``, uniform sampling distribution."""
    if K < 1:
        raise ConfigError("a bandit needs at least one arm")
    eta, gamma = cfg.params_for(K)
    lw = np.full(K, _initial_log_weight(K, cfg.horizon, eta, gamma))
    return Exp3PState(
        log_weights=_frozen(lw),
        probs=make_strategy(np.full(K, 1.0 / K)),
        counts=_frozen(np.zeros(K, dtype=np.int64)),
        t=0,
        eta=eta,
        gamma=gamma,
        horizon=cfg.horizon,
    )


def sample_from(probs: np.ndarray, gamma: float, u: float) -> int:
    """Draw an arm from ``probs`` by inversion with one uniform ``u``.

    The exploration mass ``gamma`` is inverted first, then the weight part;
    the compiled loop uses the same scheme.
    """
    K = probs.shape[0]
    if u < gamma:
        return min(int(u / gamma * K), K - 1)
    exploit = probs - gamma / K
    cum = np.cumsum(exploit)
    target = (u - gamma) / (1.0 - gamma) * cum[-1]
    return min(int(np.searchsorted(cum, target, side="right")), K - 1)


def exp3p_update(state: Exp3PState, arm: int, reward: float, check_range: bool = True) -> Exp3PState:
    """Apply one Exp3.P update for the played ``arm``.

    Every arm receives the ``eta / (p_i sqrt(TK))`` bonus; only the played arm
    receives the importance-weighted reward ``reward / p_arm``.
    """
    if check_range and not 0.0 <= reward <= 1.0:
        raise RewardRangeError(f"reward {reward!r} outside [0, 1]")
    K, T = state.num_arms, state.horizon
    p = state.probs
    est = np.zeros(K)
    est[arm] = reward / p[arm]
    lw = state.log_weights + state.gamma / (3.0 * K) * (est + state.eta / (p * math.sqrt(T * K)))
    if not np.all(np.isfinite(lw)):
        raise NumericOverflowError("Exp3.P weights became non-finite")
    counts = state.counts.copy()
    counts[arm] += 1
    return replace(
        state,
        log_weights=_frozen(lw),
        probs=make_strategy(_probs(lw, state.gamma)),
        counts=_frozen(counts),
        t=state.t + 1,
    )


def exp3p_step(state: Exp3PState, reward_fn: Callable[[int], float],
               rng: np.random.Generator, check_range: bool = True):
    """Sample an arm, observe ``reward_fn(arm)`` and update.

    Returns ``(new_state, arm, reward)``.
    """
    arm = sample_from(state.probs, state.gamma, rng.random())
    reward = float(reward_fn(arm))
    return exp3p_update(state, arm, reward, check_range), arm, reward


def run_exp3p(K: int, cfg: BanditConfig, reward_fn: Callable[[int], float],
              rng: Optional[np.random.Generator] = None):
    """Run ``cfg.horizon`` steps against ``reward_fn``.

    Returns ``(final sampling distribution, empirical play frequencies)``.
    """
    rng = cfg.rng() if rng is None else rng
    state = exp3p_init(K, cfg)
    for _ in range(cfg.horizon):
        state, _, _ = exp3p_step(state, reward_fn, rng)
    return state.probs, make_strategy(state.counts / cfg.horizon)


@dataclass(frozen=True)
class NashApproximation:
    """Result of a self-play run.

    ``row_strategy``/``col_strategy`` are the recommendations: empirical play
    frequencies after plain self-play, truncated frequencies after
    :func:`snash.sparsify.texp3p` (then ``row_status``/``col_status`` are set).
    """

    row_strategy: MixedStrategy
    col_strategy: MixedStrategy
    row_empirical: MixedStrategy
    col_empirical: MixedStrategy
    row_final: MixedStrategy
    col_final: MixedStrategy
    row_counts: np.ndarray
    col_counts: np.ndarray
    value: float
    horizon: int
    row_params: tuple[float, float]
    col_params: tuple[float, float]
    row_status: Optional[str] = None
    col_status: Optional[str] = None


SCALINGS = {
    # row bandit sees (R - R_min) / (R_max - R_min), Nature one minus that
    "normalized": _kernels.SCALE_UNIT,
    # row bandit sees R, Nature -R
    "raw": _kernels.SCALE_RAW,
    # row bandit sees R, Nature one minus the unit-scaled reward
    "row-raw": _kernels.SCALE_ROW_RAW,
}


def _scaled(r: float, lo: float, hi: float, scaling: str) -> tuple[float, float]:
    if scaling == "raw":
        return r, -r
    z = (r - lo) / (hi - lo)
    if not 0.0 <= z <= 1.0:
        raise RewardRangeError(f"reward {r!r} outside declared bounds [{lo}, {hi}]")
    return (z if scaling == "normalized" else r), 1.0 - z


def self_play_nash(game: RewardOracle, cfg: BanditConfig, scaling: str = "normalized",
                   rng: Optional[np.random.Generator] = None) -> NashApproximation:
    """Exp3.P over policies (maximizer) against Exp3.P over scenarios (minimizer).

    Both bandits take one step per oracle call, so ``T`` steps cost ``T``
    calls.  ``scaling`` chooses what each bandit observes:

    * ``"normalized"``: us ``(R - R_min) / (R_max - R_min)`` from the oracle
      bounds, Nature one minus that;
    * ``"raw"``: us ``R``, Nature ``-R``;
    * ``"row-raw"``: us ``R``, Nature the normalized reflection.  This is the
      protocol under which the published power-benchmark sparsity and reward
      levels are reproduced.

    The reported ``value`` is the mean oracle reward over the ``T`` plays.
    """
    if scaling not in SCALINGS:
        raise ConfigError(f"unknown reward scaling {scaling!r}")
    K, S, T = game.num_policies, game.num_scenarios, cfg.horizon
    lo, hi = game.bounds
    if scaling != "raw" and not hi > lo:
        raise DegenerateMatrixError("reward bounds are degenerate (R_max == R_min)")
    rng = cfg.rng() if rng is None else rng
    eta_r, gamma_r = cfg.params_for(K)
    eta_c, gamma_c = cfg.params_for(S)
    logw_r = np.full(K, _initial_log_weight(K, T, eta_r, gamma_r))
    logw_c = np.full(S, _initial_log_weight(S, T, eta_c, gamma_c))
    spec = game.kernel_spec()
    if spec is not None:
        counts_r, counts_c, total = _run_kernel(spec, K, S, cfg, (eta_r, gamma_r),
                                                (eta_c, gamma_c), lo, hi, scaling,
                                                logw_r, logw_c, rng)
    else:
        counts_r, counts_c, total, logw_r, logw_c = _run_python(
            game, cfg, logw_r, logw_c, (eta_r, gamma_r), (eta_c, gamma_c), lo, hi, scaling, rng
        )
    return NashApproximation(
        row_strategy=make_strategy(counts_r / T),
        col_strategy=make_strategy(counts_c / T),
        row_empirical=make_strategy(counts_r / T),
        col_empirical=make_strategy(counts_c / T),
        row_final=make_strategy(_probs(logw_r, gamma_r)),
        col_final=make_strategy(_probs(logw_c, gamma_c)),
        row_counts=_frozen(counts_r),
        col_counts=_frozen(counts_c),
        value=total / T,
        horizon=T,
        row_params=(eta_r, gamma_r),
        col_params=(eta_c, gamma_c),
    )


def _run_kernel(spec, K, S, cfg, row_params, col_params, lo, hi, scaling, logw_r, logw_c, rng):
    kind = spec[0]
    empty_tab = np.zeros((1, 1))
    if kind == "matrix":
        args = (_kernels.KIND_MATRIX, np.ascontiguousarray(spec[1]), empty_tab, empty_tab, np.zeros(7))
    elif kind == "power":
        args = (_kernels.KIND_POWER, empty_tab, spec[1], spec[2], spec[3])
    else:
        raise ConfigError(f"unknown kernel spec {kind!r}")
    status, counts_r, counts_c, total = _kernels.selfplay(
        *args, K, S, cfg.horizon, *row_params, *col_params,
        cfg.period_for(K), cfg.period_for(S), float(lo), float(hi), SCALINGS[scaling],
        logw_r, logw_c, rng,
    )
    if status == _kernels.ERR_RANGE:
        raise RewardRangeError("oracle returned a reward outside its declared bounds")
    if status == _kernels.ERR_OVERFLOW:
        raise NumericOverflowError("Exp3.P weights became non-finite")
    return counts_r, counts_c, total


def _run_python(game, cfg, logw_r, logw_c, row_params, col_params, lo, hi, scaling, rng):
    T = cfg.horizon
    row = Exp3PState(_frozen(logw_r), make_strategy(_probs(logw_r, row_params[1])),
                     np.zeros(game.num_policies, dtype=np.int64), 0, *row_params, T)
    col = Exp3PState(_frozen(logw_c), make_strategy(_probs(logw_c, col_params[1])),
                     np.zeros(game.num_scenarios, dtype=np.int64), 0, *col_params, T)
    total = 0.0
    for _ in range(T):
        i = sample_from(row.probs, row.gamma, rng.random())
        j = sample_from(col.probs, col.gamma, rng.random())
        r = game.reward(i, j, rng)
        total += r
        x, y = _scaled(r, lo, hi, scaling)
        row = exp3p_update(row, i, x, check_range=False)
        col = exp3p_update(col, j, y, check_range=False)
    return row.counts.copy(), col.counts.copy(), total, row.log_weights, col.log_weights
