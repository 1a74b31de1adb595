"""Truncation of empirical play frequencies and the end-to-end SNash pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np

from .bandit import BanditConfig, NashApproximation, self_play_nash
from .errors import ConfigError, NumericError
from .game import MixedStrategy, RewardOracle, make_strategy, strategy_support

TRUNCATED = "truncated"
NON_TRUNCATED = "non-truncated"
NON_SPARSE = "non-sparse"


@dataclass(frozen=True)
class TruncationConfig:
    alpha: float = 0.7

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha!r}")


def truncation_threshold(dist, T: int, alpha: float) -> float:
    """``zeta = max_i (T p_i)^alpha / T``."""
    x = np.asarray(dist, dtype=np.float64) * T
    return float(x.max() ** alpha / T)


def truncate(dist, T: int, alpha: float) -> tuple[MixedStrategy, str]:
    """Zero out entries below ``zeta = max_i (T p_i)^alpha / T`` and renormalize.

    The comparison is done on the play-count scale ``T p_i``, so ``alpha = 1``
    keeps exactly the arg-max set.  When nothing survives (``non-truncated``)
    or nothing is removed from the support (``non-sparse``) the input is
    returned unchanged.
    """
    p = make_strategy(dist)
    if T < 1:
        raise ConfigError("T must be >= 1")
    if not 0 < alpha <= 1:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha!r}")
    x = p * T
    keep = x >= x.max() ** alpha
    if not keep.any():
        return p, NON_TRUNCATED
    if np.all(keep | (p == 0)):
        return p, NON_SPARSE
    kept = np.where(keep, p, 0.0)
    total = kept.sum()
    if not total > 0:
        raise NumericError("truncation left an empty support")
    return make_strategy(kept / total), TRUNCATED


def texp3p(game: RewardOracle, cfg: BanditConfig, trunc: TruncationConfig = TruncationConfig(),
           scaling: str = "normalized", rng: Optional[np.random.Generator] = None) -> NashApproximation:
    """Self-play followed by independent truncation of both empirical distributions."""
    approx = self_play_nash(game, cfg, scaling=scaling, rng=rng)
    return truncate_approximation(approx, trunc.alpha)


def truncate_approximation(approx: NashApproximation, alpha: float) -> NashApproximation:
    """Apply :func:`truncate` to both sides of an untruncated approximation."""
    T = approx.horizon
    p, p_status = truncate(approx.row_empirical, T, alpha)
    q, q_status = truncate(approx.col_empirical, T, alpha)
    return replace(approx, row_strategy=p, col_strategy=q, row_status=p_status, col_status=q_status)


@dataclass(frozen=True)
class DecisionReport:
    """Retained policies and scenarios, ranked, with their reward submatrix.

    ``policies`` and ``scenarios`` are ``(index, probability)`` pairs sorted by
    probability (ties by index); ``submatrix[i, j]`` is the expected reward of
    ``policies[i]`` against ``scenarios[j]``.
    """

    policies: list[tuple[int, float]]
    scenarios: list[tuple[int, float]]
    horizon: int
    alpha: Optional[float]
    row_status: Optional[str]
    col_status: Optional[str]
    value: float
    approximation: NashApproximation = field(repr=False, compare=False)
    game: RewardOracle = field(repr=False, compare=False)

    @property
    def best_policy(self) -> int:
        return self.policies[0][0]

    @property
    def sparsity(self) -> int:
        return len(self.policies)

    @property
    def policy_ranking(self) -> list[int]:
        return [i for i, _ in self.policies]

    @property
    def scenario_ranking(self) -> list[int]:
        return [j for j, _ in self.scenarios]

    @cached_property
    def submatrix(self) -> np.ndarray:
        return self.game.expected_submatrix(self.policy_ranking, self.scenario_ranking)

    def top_submatrix(self, max_policies: int, max_scenarios: int) -> np.ndarray:
        """Leading block of the submatrix, without building the full one."""
        return self.game.expected_submatrix(self.policy_ranking[:max_policies],
                                            self.scenario_ranking[:max_scenarios])


def report_from(game: RewardOracle, approx: NashApproximation, alpha: Optional[float]) -> DecisionReport:
    return DecisionReport(
        policies=strategy_support(approx.row_strategy),
        scenarios=strategy_support(approx.col_strategy),
        horizon=approx.horizon,
        alpha=alpha,
        row_status=approx.row_status,
        col_status=approx.col_status,
        value=approx.value,
        approximation=approx,
        game=game,
    )


def snash(game: RewardOracle, cfg: BanditConfig, trunc: TruncationConfig = TruncationConfig(),
          scaling: str = "normalized", rng: Optional[np.random.Generator] = None) -> DecisionReport:
    """Run truncated Exp3.P self-play and summarize it as a :class:`DecisionReport`."""
    approx = texp3p(game, cfg, trunc, scaling=scaling, rng=rng)
    return report_from(game, approx, trunc.alpha)
