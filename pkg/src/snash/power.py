"""Synthetic power-investment game.

Policies are ternary vectors ``(C, F, X, S, W, P, T, U, N, A)`` (coal, fission,
fusion, supergrids, wind, PV, solar thermal, unconventional renewables,
nanogrids, Scandinavian storage); scenarios are ternary vectors
``(Z, WB, PB, TB, XB, UB, SB, CC, NT)`` (geopolitical issues, wind / PV /
solar-thermal / fusion / unconventional / storage breakthroughs, climate
disaster, nuclear terrorism).  Both are indexed with
:func:`snash.game.encode_ternary`.

The reward formula is implemented term for term as published, including the
repeated ``-F*NT`` term and the absence of ``A`` from the cost sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

import numba
import numpy as np

from .errors import ConfigError
from .game import RewardOracle, decode_ternary, encode_ternary, ternary_table

NUM_POLICY_VARS = 10
NUM_SCENARIO_VARS = 9
NUM_POLICIES = 3**NUM_POLICY_VARS
NUM_SCENARIOS = 3**NUM_SCENARIO_VARS


class PolicyVector(NamedTuple):
    C: float = 0.0
    F: float = 0.0
    X: float = 0.0
    S: float = 0.0
    W: float = 0.0
    P: float = 0.0
    T: float = 0.0
    U: float = 0.0
    N: float = 0.0
    A: float = 0.0

    @classmethod
    def from_index(cls, index: int) -> "PolicyVector":
        return cls(*decode_ternary(index, NUM_POLICY_VARS))

    def index(self) -> int:
        return encode_ternary(self)


class ScenarioVector(NamedTuple):
    Z: float = 0.0
    WB: float = 0.0
    PB: float = 0.0
    TB: float = 0.0
    XB: float = 0.0
    UB: float = 0.0
    SB: float = 0.0
    CC: float = 0.0
    NT: float = 0.0

    @classmethod
    def from_index(cls, index: int) -> "ScenarioVector":
        return cls(*decode_ternary(index, NUM_SCENARIO_VARS))

    def index(self) -> int:
        return encode_ternary(self)


@dataclass(frozen=True)
class PowerModelConfig:
    """Meta-parameters of the benchmark.

    Attributes:
        cost: weight of the investment cost sum.
        c: weight of the indicator bonus in the modified reward.
        noise: ``"stochastic"`` multiplies the core by ``(2/3)(1 + u)``,
            ``u ~ U[0, 1)``; ``"expected"`` uses the mean factor 1.
        neq_as_eq: read the ``~=`` comparisons of the modified reward as
            equality instead of inequality.
    """

    cost: float = 1.0
    c: float = 1.0
    noise: str = "stochastic"
    neq_as_eq: bool = False

    def __post_init__(self):
        if self.cost < 0 or self.c < 0:
            raise ConfigError("cost and c must be non-negative")
        if self.noise not in ("stochastic", "expected"):
            raise ConfigError(f"unknown noise mode {self.noise!r}")


def _core(C, F, X, S, W, P, T, U, N, A, Z, WB, PB, TB, XB, UB, SB, CC, NT, cost):
    # Works on scalars (jitted below) and on broadcast numpy arrays.
    return (
        N * (1 - Z) / 5
        - cost * (N + U + T + P + W + S + X + F + C)
        + 7 * XB * X
        + W * (1 + WB) * (SB + np.sqrt(S)) / 2
        + 3 * P * (PB + SB)
        - 4 * C * CC
        - F * NT
        + S * (1 - Z)
        + P * Z
        + U * UB
        + T * S * (1 + TB - SB / 2)
        - F * NT
        + A * (1 + W + P - 2 * SB)
    )


def _bonus_count(C, F, X, P, XB, CC, NT, PB, neq_as_eq):
    if neq_as_eq:
        return (X == XB) * 1.0 + (C == CC) * 1.0 + (NT == F) * 1.0 + (P == PB) * 1.0
    return (X == XB) * 1.0 + (C != CC) * 1.0 + (NT != F) * 1.0 + (P == PB) * 1.0


_core_jit = numba.njit(cache=True)(_core)
_bonus_count_jit = numba.njit(cache=True)(_bonus_count)


@numba.njit(cache=True)
def power_reward_kernel(ptab, stab, k, s, cost, c, modified, neq_as_eq, noise_u):
    """Raw reward of tables rows ``k``, ``s``; ``noise_u < 0`` means expected mode."""
    kv = ptab[k]
    sv = stab[s]
    r = _core_jit(
        kv[0], kv[1], kv[2], kv[3], kv[4], kv[5], kv[6], kv[7], kv[8], kv[9],
        sv[0], sv[1], sv[2], sv[3], sv[4], sv[5], sv[6], sv[7], sv[8], cost,
    )
    if noise_u >= 0.0:
        r *= (2.0 / 3.0) * (1.0 + noise_u)
    if modified:
        r += c * _bonus_count_jit(kv[0], kv[1], kv[2], kv[5], sv[4], sv[7], sv[8], sv[2], neq_as_eq)
    return r


def base_reward_core(k, s, cost: float = 1.0) -> float:
    """Noise-free bracketed sum of the base reward."""
    k, s = PolicyVector(*k), ScenarioVector(*s)
    return float(_core(*k, *s, cost))


def noise_factor(u: float) -> float:
    return (2.0 / 3.0) * (1.0 + u)


def base_reward(k, s, cfg: PowerModelConfig, rng: Optional[np.random.Generator]) -> float:
    """Base reward; one uniform draw from ``rng`` in stochastic mode."""
    core = base_reward_core(k, s, cfg.cost)
    if cfg.noise == "expected":
        return core
    return core * noise_factor(rng.random())


def indicator_bonus(k, s, neq_as_eq: bool = False) -> int:
    """Number of satisfied comparisons among ``X==XB, C~=CC, NT~=F, P==PB``."""
    k, s = PolicyVector(*k), ScenarioVector(*s)
    return int(_bonus_count(k.C, k.F, k.X, k.P, s.XB, s.CC, s.NT, s.PB, neq_as_eq))


def modified_reward(k, s, cfg: PowerModelConfig, rng: Optional[np.random.Generator]) -> float:
    """Base reward plus ``c`` times the indicator count, added outside the noise."""
    return base_reward(k, s, cfg, rng) + cfg.c * indicator_bonus(k, s, cfg.neq_as_eq)


# --- bounds -------------------------------------------------------------------


def _imul(a, b):
    prods = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return min(prods), max(prods)


def _iadd(*terms):
    return sum(t[0] for t in terms), sum(t[1] for t in terms)


def _iscale(x, a):
    return _imul((x, x), a)


def reward_bounds(cfg: PowerModelConfig, variant: str = "base") -> tuple[float, float]:
    """Interval-arithmetic enclosure of every reward the oracle can return."""
    v = (0.0, 1.0)  # every ternary component, and sqrt of one
    cost_sum = _iscale(-cfg.cost * 9, v)
    core = _iadd(
        _iscale(1 / 5, _imul(v, _iadd(_iscale(1, (1, 1)), _iscale(-1, v)))),
        cost_sum,
        _iscale(7, _imul(v, v)),
        _iscale(0.5, _imul(_imul(v, _iadd((1, 1), v)), _iadd(v, v))),
        _iscale(3, _imul(v, _iadd(v, v))),
        _iscale(-4, _imul(v, v)),
        _iscale(-1, _imul(v, v)),
        _imul(v, _iadd((1, 1), _iscale(-1, v))),
        _imul(v, v),
        _imul(v, v),
        _imul(_imul(v, v), _iadd((1, 1), v, _iscale(-0.5, v))),
        _iscale(-1, _imul(v, v)),
        _imul(v, _iadd((1, 1), v, v, _iscale(-2, v))),
    )
    if cfg.noise == "stochastic":
        core = _imul(core, (2 / 3, 4 / 3))
    if variant == "modified":
        core = _iadd(core, _iscale(cfg.c, (0.0, 4.0)))
    return core


# --- feature decomposition ------------------------------------------------------
#
# Every reward is sum_j phi_j(k) * psi_j(s), so expectations under a mixed
# strategy on one side reduce to a J-vector; used for exact robust scores of
# dense 59049-arm strategies.


def _policy_features(K: np.ndarray, cost: float) -> np.ndarray:
    C, F, X, S, W, P, T, U, N, A = K.T
    return np.stack(
        [
            N,
            -cost * (N + U + T + P + W + S + X + F + C) + A * (1 + W + P),
            X,
            W,
            W * np.sqrt(S),
            P,
            C,
            F,
            S,
            U,
            T * S,
            A,
        ],
        axis=1,
    )


def _scenario_features(Sv: np.ndarray) -> np.ndarray:
    Z, WB, PB, TB, XB, UB, SB, CC, NT = Sv.T
    return np.stack(
        [
            (1 - Z) / 5,
            np.ones_like(Z),
            7 * XB,
            SB * (1 + WB) / 2,
            (1 + WB) / 2,
            3 * (PB + SB) + Z,
            -4 * CC,
            -2 * NT,
            1 - Z,
            UB,
            1 + TB - SB / 2,
            -2 * SB,
        ],
        axis=1,
    )


def _indicator_features(values: np.ndarray) -> np.ndarray:
    return np.stack([values == v for v in (0.0, 0.5, 1.0)], axis=1).astype(np.float64)


def _bonus_features(K: np.ndarray, Sv: np.ndarray, neq_as_eq: bool):
    """Features for the indicator count, same ``sum phi * psi`` layout."""
    C, F, X, P = K[:, 0], K[:, 1], K[:, 2], K[:, 5]
    XB, CC, NT, PB = Sv[:, 4], Sv[:, 7], Sv[:, 8], Sv[:, 2]
    phi = [_indicator_features(X), _indicator_features(P)]
    psi = [_indicator_features(XB), _indicator_features(PB)]
    const_k = np.zeros(len(K))
    for a, b in ((C, CC), (F, NT)):
        phi.append(_indicator_features(a))
        if neq_as_eq:
            psi.append(_indicator_features(b))
        else:
            psi.append(-_indicator_features(b))
            const_k = const_k + 1.0
    phi.append(const_k[:, None])
    psi.append(np.ones((len(Sv), 1)))
    return np.concatenate(phi, axis=1), np.concatenate(psi, axis=1)


class PowerGame(RewardOracle):
    """Oracle over all ``3^10 x 3^9`` policy/scenario pairs.

    With ``normalize=True`` every reward is mapped affinely onto [0, 1] using
    :func:`reward_bounds`.
    """

    num_policies = NUM_POLICIES
    num_scenarios = NUM_SCENARIOS

    def __init__(self, cfg: PowerModelConfig = PowerModelConfig(), variant: str = "base",
                 normalize: bool = False):
        if variant not in ("base", "modified"):
            raise ConfigError(f"unknown power-game variant {variant!r}")
        self.cfg = cfg
        self.variant = variant
        self.normalize = normalize
        lo, hi = reward_bounds(cfg, variant)
        self.raw_bounds = (lo, hi)
        if normalize:
            self.scale = 1.0 / (hi - lo)
            self.offset = -lo * self.scale
        else:
            self.scale, self.offset = 1.0, 0.0

    @property
    def modified(self) -> bool:
        return self.variant == "modified"

    @property
    def bounds(self):
        lo, hi = self.raw_bounds
        return lo * self.scale + self.offset, hi * self.scale + self.offset

    @cached_property
    def policy_table(self) -> np.ndarray:
        return ternary_table(NUM_POLICY_VARS)

    @cached_property
    def scenario_table(self) -> np.ndarray:
        return ternary_table(NUM_SCENARIO_VARS)

    def _raw(self, k, s, u):
        cfg = self.cfg
        return power_reward_kernel(self.policy_table, self.scenario_table, k, s, cfg.cost,
                                   cfg.c, self.modified, cfg.neq_as_eq, u)

    def reward(self, k, s, rng):
        u = rng.random() if self.cfg.noise == "stochastic" else -1.0
        return self._raw(k, s, u) * self.scale + self.offset

    def expected_reward(self, k, s):
        return self._raw(k, s, -1.0) * self.scale + self.offset

    def rewards(self, ks, ss, rng):
        K = self.policy_table[np.asarray(ks, dtype=np.int64)]
        Sv = self.scenario_table[np.asarray(ss, dtype=np.int64)]
        r = _core(*K.T, *Sv.T, self.cfg.cost)
        if self.cfg.noise == "stochastic":
            r = r * noise_factor(rng.random(len(r)))
        if self.modified:
            r = r + self.cfg.c * _bonus_count(K[:, 0], K[:, 1], K[:, 2], K[:, 5], Sv[:, 4],
                                              Sv[:, 7], Sv[:, 8], Sv[:, 2], self.cfg.neq_as_eq)
        return r * self.scale + self.offset

    def expected_block(self, rows, cols) -> np.ndarray:
        """Noise-free rewards evaluated directly from the formula (no features)."""
        K = self.policy_table[np.asarray(rows, dtype=np.int64)][:, None, :]
        Sv = self.scenario_table[np.asarray(cols, dtype=np.int64)][None, :, :]
        r = _core(*np.moveaxis(K, 2, 0), *np.moveaxis(Sv, 2, 0), self.cfg.cost)
        if self.modified:
            r = r + self.cfg.c * _bonus_count(
                K[..., 0], K[..., 1], K[..., 2], K[..., 5],
                Sv[..., 4], Sv[..., 7], Sv[..., 8], Sv[..., 2], self.cfg.neq_as_eq,
            )
        return r * self.scale + self.offset

    def expected_submatrix(self, rows, cols):
        return self.expected_block(list(rows), list(cols))

    @cached_property
    def _features(self):
        phi = _policy_features(self.policy_table, self.cfg.cost)
        psi = _scenario_features(self.scenario_table)
        if self.modified:
            bphi, bpsi = _bonus_features(self.policy_table, self.scenario_table, self.cfg.neq_as_eq)
            phi = np.concatenate([phi, self.cfg.c * bphi], axis=1)
            psi = np.concatenate([psi, bpsi], axis=1)
        return phi, psi

    def column_expectations(self, p):
        p = self._check(p, self.num_policies)
        phi, psi = self._features
        return (psi @ (p @ phi)) * self.scale + self.offset

    def row_expectations(self, q):
        q = self._check(q, self.num_scenarios)
        phi, psi = self._features
        return (phi @ (q @ psi)) * self.scale + self.offset

    def kernel_spec(self):
        cfg = self.cfg
        params = np.array([
            cfg.cost, cfg.c, float(self.modified), float(cfg.neq_as_eq),
            float(cfg.noise == "stochastic"), self.scale, self.offset,
        ])
        return ("power", self.policy_table, self.scenario_table, params)


def power_game(cfg: PowerModelConfig = PowerModelConfig(), variant: str = "base",
               normalize: bool = False) -> PowerGame:
    return PowerGame(cfg, variant, normalize)
