import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from snash.bandit import BanditConfig
from snash.errors import ConfigError
from snash.game import MatrixGame
from snash.sparsify import (
    NON_SPARSE,
    NON_TRUNCATED,
    TRUNCATED,
    TruncationConfig,
    snash,
    texp3p,
    truncate,
    truncation_threshold,
)

RPS = [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]


def test_worked_example():
    p = [0.5, 0.3, 0.15, 0.05]
    assert truncation_threshold(p, 1000, 0.7) == pytest.approx(500**0.7 / 1000, rel=1e-12)
    assert truncation_threshold(p, 1000, 0.7) == pytest.approx(0.0775, abs=1e-4)
    q, status = truncate(p, 1000, 0.7)
    assert status == TRUNCATED
    np.testing.assert_allclose(q, [0.5263, 0.3158, 0.1579, 0.0], atol=1e-4)
    np.testing.assert_allclose(q[:3], np.array(p[:3]) / 0.95, rtol=1e-12)


def test_alpha_one_keeps_argmax_set():
    q, status = truncate([0.4, 0.2, 0.4], 10, 1.0)
    np.testing.assert_array_equal(q, [0.5, 0.0, 0.5])
    q, _ = truncate([0.1, 0.6, 0.3], 10, 1.0)
    np.testing.assert_array_equal(q, [0.0, 1.0, 0.0])


def test_uniform_is_non_sparse():
    p = np.full(8, 1 / 8)
    q, status = truncate(p, 800, 0.5)
    assert status == NON_SPARSE and q is not None and np.array_equal(q, p)


def test_non_truncated_when_counts_below_one():
    # With fewer plays than arms, T p_i < 1 and the threshold exceeds every count.
    p = np.full(8, 1 / 8)
    q, status = truncate(p, 4, 0.5)
    assert status == NON_TRUNCATED and np.array_equal(q, p)


def test_validation():
    with pytest.raises(ConfigError):
        truncate([0.5, 0.5], 10, 0.0)
    with pytest.raises(ConfigError):
        truncate([0.5, 0.5], 10, 1.5)
    with pytest.raises(ConfigError):
        TruncationConfig(alpha=-0.1)


count_vectors = st.lists(st.integers(0, 5000), min_size=1, max_size=25).filter(lambda c: sum(c) > 0)


@given(count_vectors, st.floats(0.05, 1.0))
def test_truncation_invariants(counts, alpha):
    counts = np.array(counts)
    T = int(counts.sum())
    p = counts / T
    q, status = truncate(p, T, alpha)
    assert abs(q.sum() - 1) <= 1e-9
    assert set(np.flatnonzero(q)) <= set(np.flatnonzero(p))
    if status == TRUNCATED:
        zeta = truncation_threshold(p, T, alpha)
        kept = q > 0
        # comparisons on the count scale: retained >= threshold, removed below it
        assert np.all(counts[kept] >= (T * zeta) * (1 - 1e-12))
        assert np.all(counts[~kept & (counts > 0)] < T * zeta)
        np.testing.assert_allclose(q[kept], p[kept] / p[kept].sum(), rtol=1e-12)


@given(count_vectors)
def test_support_non_increasing_in_alpha(counts):
    counts = np.array(counts)
    T = int(counts.sum())
    sizes = [np.count_nonzero(truncate(counts / T, T, a)[0]) for a in np.linspace(0.1, 1.0, 10)]
    assert all(x >= y for x, y in zip(sizes, sizes[1:]))
    argmax = np.flatnonzero(counts == counts.max())
    assert np.array_equal(np.flatnonzero(truncate(counts / T, T, 1.0)[0]), argmax)


def test_texp3p_dominant_row_becomes_pure():
    a = texp3p(MatrixGame([[1, 1], [0, 0]]), BanditConfig(horizon=100_000, seed=1), TruncationConfig(0.9))
    np.testing.assert_array_equal(a.row_strategy, [1.0, 0.0])


def test_texp3p_rps_keeps_full_support():
    cfg = BanditConfig(horizon=100_000, seed=2)
    a = texp3p(MatrixGame(RPS), cfg, TruncationConfig(0.7))
    assert np.count_nonzero(a.row_strategy) == 3 and np.count_nonzero(a.col_strategy) == 3
    b = texp3p(MatrixGame(RPS), cfg, TruncationConfig(0.99))
    for s in (b.row_strategy, b.col_strategy):
        assert 1 <= np.count_nonzero(s) <= 3


def test_snash_single_cell_game():
    r = snash(MatrixGame([[4.0]]), BanditConfig(horizon=50), scaling="raw")
    assert r.policies == [(0, 1.0)] and r.scenarios == [(0, 1.0)]
    assert r.submatrix.tolist() == [[4.0]]


def test_snash_matching_pennies_report():
    m = np.array([[1.0, -1.0], [-1.0, 1.0]])
    r = snash(MatrixGame(m), BanditConfig(horizon=100_000, seed=3), TruncationConfig(0.5))
    assert r.sparsity == 2 and len(r.scenarios) == 2
    np.testing.assert_array_equal(r.submatrix, m[np.ix_(r.policy_ranking, r.scenario_ranking)])
    assert sorted(r.policy_ranking) == [0, 1]


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.1, 1.0))
def test_report_shape_invariants(K, S, seed, alpha):
    assume(K * S > 1)  # a 1x1 matrix is constant, hence degenerate
    a = np.random.default_rng(seed).normal(size=(K, S))
    r = snash(MatrixGame(a), BanditConfig(horizon=500, seed=seed), TruncationConfig(alpha))
    assert r.submatrix.shape == (len(r.policies), len(r.scenarios))
    assert abs(sum(p for _, p in r.policies) - 1) <= 1e-9
    assert abs(sum(q for _, q in r.scenarios) - 1) <= 1e-9
    probs = [p for _, p in r.policies]
    assert probs == sorted(probs, reverse=True)
    assert r.best_policy == min(i for i, p in r.policies if p == probs[0])
