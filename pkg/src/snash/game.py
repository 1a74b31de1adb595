"""Games, strategies and reward matrices shared by every other module.

A game is a :class:`RewardOracle`: the decision maker picks a policy index
``k`` (maximizer), Nature picks a scenario index ``s`` (minimizer), and the
oracle returns a possibly noisy real reward.  Oracles may wrap an explicit
matrix (:class:`MatrixGame`) or an arbitrary function (:class:`CallableGame`).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DegenerateMatrixError,
    DimensionMismatchError,
    InvalidComponentError,
)

PROB_TOL = 1e-9
TERNARY_VALUES = (0.0, 0.5, 1.0)

# A mixed strategy is a read-only float64 vector; see make_strategy.
MixedStrategy = np.ndarray


def make_strategy(probs, tol: float = PROB_TOL) -> MixedStrategy:
    """Validate ``probs`` as a probability vector and freeze it.

    Raises:
        ConfigError: negative entries, empty input, or sum off by more than ``tol``.
    """
    p = np.array(probs, dtype=np.float64).reshape(-1)
    if p.size == 0:
        raise ConfigError("a mixed strategy needs at least one arm")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ConfigError("mixed strategy entries must be finite and non-negative")
    if abs(p.sum() - 1.0) > tol:
        raise ConfigError(f"mixed strategy sums to {p.sum()!r}, not 1")
    p.flags.writeable = False
    return p


def uniform_strategy(n: int) -> MixedStrategy:
    return make_strategy(np.full(n, 1.0 / n))


def pure_strategy(n: int, i: int) -> MixedStrategy:
    p = np.zeros(n)
    p[i] = 1.0
    return make_strategy(p)


def strategy_support(p) -> list[tuple[int, float]]:
    """Arms with positive probability, most probable first, ties by index."""
    p = make_strategy(p)
    idx = np.flatnonzero(p > 0)
    order = sorted(idx.tolist(), key=lambda i: (-p[i], i))
    return [(i, float(p[i])) for i in order]


# --- ternary encodings --------------------------------------------------------


def _digit(component) -> int:
    for d, value in enumerate(TERNARY_VALUES):
        if component == value:
            return d
    raise InvalidComponentError(f"component {component!r} is not one of 0, 1/2, 1")


def encode_ternary(v: Sequence[float]) -> int:
    """Map a vector over {0, 1/2, 1} to an index.

    Digit ``2 * component`` in base 3, least-significant digit first, so
    ``(1/2, 1, 0, ...)`` encodes to ``1 + 2 * 3 = 7``.
    """
    index = 0
    for position, component in enumerate(v):
        index += _digit(component) * 3**position
    return index


def decode_ternary(index: int, length: int) -> tuple[float, ...]:
    """Inverse of :func:`encode_ternary` for vectors of ``length`` components."""
    if length < 0:
        raise ConfigError("length must be non-negative")
    if not 0 <= index < 3**length:
        raise ConfigError(f"index {index} outside [0, 3^{length})")
    out = []
    for _ in range(length):
        index, d = divmod(index, 3)
        out.append(TERNARY_VALUES[d])
    return tuple(out)


def ternary_table(length: int) -> np.ndarray:
    """All ``3**length`` vectors as rows, row ``i`` being ``decode_ternary(i)``."""
    idx = np.arange(3**length)
    digits = (idx[:, None] // 3 ** np.arange(length)[None, :]) % 3
    return digits * 0.5


# --- reward matrices ----------------------------------------------------------


@dataclass(frozen=True)
class RewardMatrix:
    """Dense ``K x S`` reward array.

    ``normalization`` is ``(scale, offset)`` with ``entries = raw * scale + offset``.
    """

    entries: np.ndarray
    normalization: Optional[tuple[float, float]] = None

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64)
        if a.ndim == 1:
            a = a[None, :]
        if a.ndim != 2 or a.size == 0:
            raise ConfigError("a reward matrix must be a non-empty 2-D array")
        if not np.all(np.isfinite(a)):
            raise ConfigError("reward matrix entries must be finite")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def raw(self) -> np.ndarray:
        """Entries mapped back through the normalization record, if any."""
        if self.normalization is None:
            return self.entries
        scale, offset = self.normalization
        return (self.entries - offset) / scale


def as_matrix(m) -> RewardMatrix:
    return m if isinstance(m, RewardMatrix) else RewardMatrix(m)


def normalize_matrix(m) -> RewardMatrix:
    """Min-max scale onto [0, 1], keeping a record so raw values are recoverable."""
    m = as_matrix(m)
    lo, hi = float(m.entries.min()), float(m.entries.max())
    if not hi > lo:
        raise DegenerateMatrixError("cannot normalize a constant matrix")
    scale = 1.0 / (hi - lo)
    offset = -lo * scale
    entries = np.clip((m.entries - lo) / (hi - lo), 0.0, 1.0)
    if m.normalization is not None:
        s0, o0 = m.normalization
        scale, offset = scale * s0, scale * o0 + offset
    return RewardMatrix(entries, (scale, offset))


def load_csv_matrix(path) -> RewardMatrix:
    """Read a header-less numeric CSV: rows are policies, columns scenarios."""
    with open(path, encoding="utf-8") as fh:
        try:
            a = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=np.float64)
        except ValueError as exc:
            raise ConfigError(f"{path}: not a numeric CSV matrix ({exc})") from None
    return RewardMatrix(a)


# --- oracles ------------------------------------------------------------------


class RewardOracle(ABC):
    """A finite zero-sum game between us (rows) and Nature (columns).

    Subclasses provide sizes, bounds on every reward they can return, a
    (possibly noisy) sampled reward and its noise-free expectation.
    """

    num_policies: int
    num_scenarios: int

    @property
    @abstractmethod
    def bounds(self) -> tuple[float, float]:
        """Interval ``(r_min, r_max)`` containing all sampled rewards."""

    @abstractmethod
    def reward(self, k: int, s: int, rng: Optional[np.random.Generator]) -> float:
        """One sampled reward; deterministic given the generator state."""

    @abstractmethod
    def expected_reward(self, k: int, s: int) -> float:
        """Noise-free reward of the pair ``(k, s)``."""

    @property
    def shape(self) -> tuple[int, int]:
        return self.num_policies, self.num_scenarios

    def rewards(self, ks: np.ndarray, ss: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Sampled rewards for paired index arrays."""
        return np.array([self.reward(int(k), int(s), rng) for k, s in zip(ks, ss)], dtype=np.float64)

    def expected_submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        return np.array(
            [[self.expected_reward(k, s) for s in cols] for k in rows], dtype=np.float64
        ).reshape(len(rows), len(cols))

    def column_expectations(self, p) -> np.ndarray:
        """``E_p R(., s)`` for every scenario ``s`` (noise-free)."""
        p = self._check(p, self.num_policies)
        rows = np.flatnonzero(p)
        sub = self.expected_submatrix(rows, range(self.num_scenarios))
        return p[rows] @ sub

    def row_expectations(self, q) -> np.ndarray:
        """``E_q R(k, .)`` for every policy ``k`` (noise-free)."""
        q = self._check(q, self.num_scenarios)
        cols = np.flatnonzero(q)
        sub = self.expected_submatrix(range(self.num_policies), cols)
        return sub @ q[cols]

    def kernel_spec(self):
        """Data for the compiled self-play loop, or ``None`` for the Python path."""
        return None

    @staticmethod
    def _check(p, n: int) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64)
        if p.shape != (n,):
            raise DimensionMismatchError(f"expected a strategy over {n} arms, got shape {p.shape}")
        return p


class MatrixGame(RewardOracle):
    """Deterministic game given by an explicit reward matrix."""

    def __init__(self, matrix):
        self.matrix = as_matrix(matrix)
        self.num_policies, self.num_scenarios = self.matrix.shape

    @property
    def bounds(self) -> tuple[float, float]:
        e = self.matrix.entries
        return float(e.min()), float(e.max())

    def reward(self, k, s, rng=None) -> float:
        return float(self.matrix.entries[k, s])

    def expected_reward(self, k, s) -> float:
        return float(self.matrix.entries[k, s])

    def rewards(self, ks, ss, rng=None):
        return self.matrix.entries[np.asarray(ks), np.asarray(ss)]

    def expected_submatrix(self, rows, cols) -> np.ndarray:
        return self.matrix.entries[np.ix_(list(rows), list(cols))]

    def column_expectations(self, p) -> np.ndarray:
        return self._check(p, self.num_policies) @ self.matrix.entries

    def row_expectations(self, q) -> np.ndarray:
        return self.matrix.entries @ self._check(q, self.num_scenarios)

    def kernel_spec(self):
        return ("matrix", self.matrix.entries)


class CallableGame(RewardOracle):
    """Game defined by a Python function ``fn(k, s, rng) -> float``.

    ``fn`` must accept ``rng=None`` and then return the noise-free reward,
    unless a separate ``expected`` function is given.
    """

    def __init__(
        self,
        num_policies: int,
        num_scenarios: int,
        fn: Callable[[int, int, Optional[np.random.Generator]], float],
        bounds: tuple[float, float],
        expected: Optional[Callable[[int, int], float]] = None,
    ):
        if num_policies < 1 or num_scenarios < 1:
            raise ConfigError("a game needs at least one policy and one scenario")
        if not bounds[0] <= bounds[1]:
            raise ConfigError("bounds must satisfy r_min <= r_max")
        self.num_policies = num_policies
        self.num_scenarios = num_scenarios
        self._fn = fn
        self._bounds = (float(bounds[0]), float(bounds[1]))
        self._expected = expected

    @property
    def bounds(self):
        return self._bounds

    def reward(self, k, s, rng):
        return float(self._fn(k, s, rng))

    def expected_reward(self, k, s):
        if self._expected is not None:
            return float(self._expected(k, s))
        return float(self._fn(k, s, None))

