"""Compiled two-bandit Exp3.P self-play loop.

Each bandit keeps log-weights plus a binary sum tree over
``exp(logw - shift)`` so that sampling and single-arm updates cost
``O(log K)``.  The exploration bonus touches every arm and is accrued every
``period`` steps from the distribution at the start of the period;
``period == 1`` is the step-by-step recurrence.

Random draws per step, in order: row sampling uniform, column sampling
uniform, then the oracle's noise uniform (stochastic power game only).  The
pure-Python path in :mod:`snash.bandit` consumes the stream identically.
"""

import numba
import numpy as np

from .power import power_reward_kernel

KIND_MATRIX = 0
KIND_POWER = 1

SCALE_UNIT = 0
SCALE_RAW = 1
SCALE_ROW_RAW = 2

OK = 0
ERR_RANGE = 1
ERR_OVERFLOW = 2

_RESCALE_AT = 500.0
_TINY = 1e-250


@numba.njit(cache=True)
def tree_size(n):
    size = 1
    while size < n:
        size *= 2
    return size


@numba.njit(cache=True)
def _rebuild(tree, w, leaves):
    n = w.shape[0]
    for i in range(leaves):
        tree[leaves + i] = w[i] if i < n else 0.0
    for i in range(leaves - 1, 0, -1):
        tree[i] = tree[2 * i] + tree[2 * i + 1]


@numba.njit(cache=True)
def _set_leaf(tree, leaves, i, value):
    j = leaves + i
    tree[j] = value
    j //= 2
    while j >= 1:
        tree[j] = tree[2 * j] + tree[2 * j + 1]
        j //= 2


@numba.njit(cache=True)
def _refresh_weights(logw, w, tree, leaves):
    shift = logw.max()
    for i in range(logw.shape[0]):
        w[i] = np.exp(logw[i] - shift)
    _rebuild(tree, w, leaves)
    return shift


@numba.njit(cache=True)
def sample_arm(tree, leaves, n, gamma, u):
    """Inverse-CDF draw from ``(1 - gamma) * w / sum(w) + gamma / n``."""
    if u < gamma:
        arm = int(u / gamma * n)
        return min(arm, n - 1)
    target = (u - gamma) / (1.0 - gamma) * tree[1]
    j = 1
    while j < leaves:
        left = tree[2 * j]
        if target < left:
            j = 2 * j
        else:
            target -= left
            j = 2 * j + 1
    arm = j - leaves
    if arm >= n:  # rounding pushed the target into the zero padding
        arm = n - 1
        while arm > 0 and tree[leaves + arm] == 0.0:
            arm -= 1
    return arm


@numba.njit(cache=True)
def _inv_probs(w, total, gamma, inv_p):
    n = w.shape[0]
    for i in range(n):
        inv_p[i] = 1.0 / ((1.0 - gamma) * w[i] / total + gamma / n)


@numba.njit(cache=True)
def _apply_bonus(logw, inv_p, coef, steps):
    ok = True
    for i in range(logw.shape[0]):
        logw[i] += coef * steps * inv_p[i]
        if not np.isfinite(logw[i]):
            ok = False
    return ok


@numba.njit(cache=True)
def _reward(kind, matrix, ptab, stab, params, k, s, rng):
    if kind == KIND_MATRIX:
        return matrix[k, s]
    u = rng.random() if params[4] > 0.0 else -1.0
    r = power_reward_kernel(ptab, stab, k, s, params[0], params[1], params[2] > 0.0,
                            params[3] > 0.0, u)
    return r * params[5] + params[6]


@numba.njit(cache=True)
def selfplay(kind, matrix, ptab, stab, params, K, S, T,
             eta_r, gamma_r, eta_c, gamma_c, period_r, period_c,
             lo, hi, scaling, logw_r, logw_c, rng):
    """Run ``T`` joint steps; ``logw_r``/``logw_c`` hold initial log-weights and are updated.

    ``scaling`` selects the rewards fed to the bandits (see
    :data:`snash.bandit.SCALINGS`).  Returns (status, row counts, column
    counts, sum of oracle rewards).
    """
    counts_r = np.zeros(K, dtype=np.int64)
    counts_c = np.zeros(S, dtype=np.int64)
    leaves_r = tree_size(K)
    leaves_c = tree_size(S)
    tree_r = np.zeros(2 * leaves_r)
    tree_c = np.zeros(2 * leaves_c)
    w_r = np.empty(K)
    w_c = np.empty(S)
    shift_r = _refresh_weights(logw_r, w_r, tree_r, leaves_r)
    shift_c = _refresh_weights(logw_c, w_c, tree_c, leaves_c)
    inv_r = np.empty(K)
    inv_c = np.empty(S)
    _inv_probs(w_r, tree_r[1], gamma_r, inv_r)
    _inv_probs(w_c, tree_c[1], gamma_c, inv_c)
    # exponent factors of the weight update: (gamma/3K) * (Rhat + eta / (p sqrt(TK)))
    lr_r = gamma_r / (3.0 * K)
    lr_c = gamma_c / (3.0 * S)
    bonus_r = lr_r * eta_r / np.sqrt(T * K)
    bonus_c = lr_c * eta_c / np.sqrt(T * S)
    span = hi - lo
    total = 0.0
    pending_r = 0
    pending_c = 0
    for t in range(T):
        i = sample_arm(tree_r, leaves_r, K, gamma_r, rng.random())
        j = sample_arm(tree_c, leaves_c, S, gamma_c, rng.random())
        r = _reward(kind, matrix, ptab, stab, params, i, j, rng)
        total += r
        counts_r[i] += 1
        counts_c[j] += 1
        if scaling == SCALE_RAW:
            x = r
            y = -r
        else:
            z = (r - lo) / span
            if z < 0.0 or z > 1.0:
                return ERR_RANGE, counts_r, counts_c, total
            x = z if scaling == SCALE_UNIT else r
            y = 1.0 - z
        p_i = (1.0 - gamma_r) * w_r[i] / tree_r[1] + gamma_r / K
        q_j = (1.0 - gamma_c) * w_c[j] / tree_c[1] + gamma_c / S
        logw_r[i] += lr_r * x / p_i
        logw_c[j] += lr_c * y / q_j
        pending_r += 1
        pending_c += 1
        if pending_r == period_r or t == T - 1:
            if not _apply_bonus(logw_r, inv_r, bonus_r, pending_r):
                return ERR_OVERFLOW, counts_r, counts_c, total
            shift_r = _refresh_weights(logw_r, w_r, tree_r, leaves_r)
            _inv_probs(w_r, tree_r[1], gamma_r, inv_r)
            pending_r = 0
        else:
            d = logw_r[i] - shift_r
            if not np.isfinite(d):
                return ERR_OVERFLOW, counts_r, counts_c, total
            if d > _RESCALE_AT:
                shift_r = _refresh_weights(logw_r, w_r, tree_r, leaves_r)
            else:
                w_r[i] = np.exp(d)
                _set_leaf(tree_r, leaves_r, i, w_r[i])
                if tree_r[1] < _TINY:
                    shift_r = _refresh_weights(logw_r, w_r, tree_r, leaves_r)
        if pending_c == period_c or t == T - 1:
            if not _apply_bonus(logw_c, inv_c, bonus_c, pending_c):
                return ERR_OVERFLOW, counts_r, counts_c, total
            shift_c = _refresh_weights(logw_c, w_c, tree_c, leaves_c)
            _inv_probs(w_c, tree_c[1], gamma_c, inv_c)
            pending_c = 0
        else:
            d = logw_c[j] - shift_c
            if not np.isfinite(d):
                return ERR_OVERFLOW, counts_r, counts_c, total
            if d > _RESCALE_AT:
                shift_c = _refresh_weights(logw_c, w_c, tree_c, leaves_c)
            else:
                w_c[j] = np.exp(d)
                _set_leaf(tree_c, leaves_c, j, w_c[j])
                if tree_c[1] < _TINY:
                    shift_c = _refresh_weights(logw_c, w_c, tree_c, leaves_c)
    return OK, counts_r, counts_c, total
