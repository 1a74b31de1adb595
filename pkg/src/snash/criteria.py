"""Classical decision criteria, exploitability and an exact small-game solver.

Rows are our policies (maximizing), columns are Nature's scenarios.  Functions
taking ``m`` accept a :class:`~snash.game.RewardMatrix`, anything
array-like, and (where it makes sense) a :class:`~snash.game.RewardOracle`,
in which case expectations are noise-free.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DimensionMismatchError, OracleScopeError
from .game import MixedStrategy, RewardMatrix, RewardOracle, as_matrix, make_strategy

EXACT_MAX_ARMS = 8
VERIFY_TOL = 1e-9


@dataclass(frozen=True)
class CriterionResult:
    """Criterion value and the policies attaining it (lowest index first)."""

    value: float
    policies: tuple[int, ...]
    regret: Optional[RewardMatrix] = None

    @property
    def policy(self) -> int:
        return self.policies[0]


@dataclass(frozen=True)
class ExactEquilibrium:
    row: MixedStrategy
    col: MixedStrategy
    value: float
    method: str = "support-enumeration"


def _ties(values: np.ndarray, target: float, tol: float = 1e-12) -> tuple[int, ...]:
    return tuple(int(i) for i in np.flatnonzero(np.abs(values - target) <= tol))


def wald(m) -> CriterionResult:
    """Best worst case over pure policies: ``max_k min_s R[k, s]``."""
    a = as_matrix(m).entries
    row_min = a.min(axis=1)
    v = row_min.max()
    return CriterionResult(float(v), _ties(row_min, v))


def regret_matrix(m) -> RewardMatrix:
    """``regret[k, s] = max_k' R[k', s] - R[k, s]``."""
    a = as_matrix(m).entries
    return RewardMatrix(a.max(axis=0, keepdims=True) - a)


def savage(m) -> CriterionResult:
    """Smallest worst-case regret: ``min_k max_s regret[k, s]``."""
    reg = regret_matrix(m)
    worst = reg.entries.max(axis=1)
    v = worst.min()
    return CriterionResult(float(v), _ties(worst, v), reg)


def _solve_bordered(M: np.ndarray):
    """Solve ``x^T M = v 1``, ``sum x = 1`` for a square ``M``; ``None`` if singular."""
    r = M.shape[0]
    A = np.zeros((r + 1, r + 1))
    A[:r, :r] = M.T
    A[:r, r] = -1.0
    A[r, :r] = 1.0
    b = np.zeros(r + 1)
    b[r] = 1.0
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)) or np.linalg.cond(A) > 1e12:
        return None
    return sol[:r], sol[r]


def exact_nash_small(m) -> ExactEquilibrium:
    """Exact equilibrium of a game with at most 8 rows and 8 columns.

    Enumerates square support pairs, solves the indifference equations on
    each, and returns the first pair whose strategies are non-negative and
    admit no profitable deviation (within 1e-9).  Some optimal pair always
    has square, nonsingular support equations, so the search cannot miss.
    """
    a = as_matrix(m).entries
    K, S = a.shape
    if K > EXACT_MAX_ARMS or S > EXACT_MAX_ARMS:
        raise OracleScopeError(f"exact enumeration is limited to {EXACT_MAX_ARMS}x{EXACT_MAX_ARMS} games")
    for r in range(1, min(K, S) + 1):
        for rows in itertools.combinations(range(K), r):
            for cols in itertools.combinations(range(S), r):
                M = a[np.ix_(rows, cols)]
                row_sol = _solve_bordered(M)
                if row_sol is None:
                    continue
                col_sol = _solve_bordered(M.T)
                if col_sol is None:
                    continue
                (x, v), (y, _) = row_sol, col_sol
                if x.min() < -VERIFY_TOL or y.min() < -VERIFY_TOL:
                    continue
                p = np.zeros(K)
                q = np.zeros(S)
                p[list(rows)] = np.clip(x, 0.0, None)
                q[list(cols)] = np.clip(y, 0.0, None)
                p /= p.sum()
                q /= q.sum()
                if (p @ a).min() >= v - VERIFY_TOL and (a @ q).max() <= v + VERIFY_TOL:
                    return ExactEquilibrium(make_strategy(p), make_strategy(q), float(v) + 0.0)
    raise AssertionError("support enumeration found no equilibrium")  # unreachable


def _column_payoffs(m, p) -> np.ndarray:
    if isinstance(m, RewardOracle):
        return m.column_expectations(p)
    a = as_matrix(m).entries
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (a.shape[0],):
        raise DimensionMismatchError(f"strategy of length {p.shape} for a {a.shape} matrix")
    return p @ a


def _row_payoffs(m, q) -> np.ndarray:
    if isinstance(m, RewardOracle):
        return m.row_expectations(q)
    a = as_matrix(m).entries
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (a.shape[1],):
        raise DimensionMismatchError(f"strategy of length {q.shape} for a {a.shape} matrix")
    return a @ q


def robust_score(m, p) -> float:
    """Worst expected reward of ``p`` over pure scenarios: ``min_s sum_k p_k R[k, s]``."""
    return float(_column_payoffs(m, p).min())


def exploitability(m, p, value: Optional[float] = None) -> float:
    """Game value minus the guaranteed reward of ``p``.

    ``value`` defaults to the exact value from :func:`exact_nash_small`,
    which restricts the default to small matrices.
    """
    if value is None:
        value = exact_nash_small(m).value
    return float(value - robust_score(m, p))


def proxy_exploitability(robust_scores: Sequence[float]) -> list[float]:
    """Gap of each robust score to the cohort's smallest one (best under "minimize")."""
    scores = [float(x) for x in robust_scores]
    if not scores:
        raise ConfigError("proxy exploitability needs at least one robust score")
    best = min(scores)
    return [s - best for s in scores]


def nash_value_upper_lower(m, approx) -> tuple[float, float]:
    """``(min_s E_p R, max_k E_q R)``, which brackets the game value.

    ``approx`` is a :class:`~snash.bandit.NashApproximation` or a ``(p, q)`` pair.
    """
    if isinstance(approx, tuple):
        p, q = approx
    else:
        p, q = approx.row_strategy, approx.col_strategy
    return float(_column_payoffs(m, p).min()), float(_row_payoffs(m, q).max())
