"""Numba kernels for the permutation Monte Carlo.

Every permutation round ``r`` draws from its own counter-based substream
``mix(key + (r + 1) * GOLDEN)``; the ``i``-th uniform of a round is
``mix(round_key + (i + 1) * GOLDEN)`` (SplitMix64).  Rounds are therefore
independent of scheduling, and all accumulators are integers, so the sums are
exact whatever the number of worker threads.

Cumulative sums are accumulated left to right in float64.
"""

from __future__ import annotations

import numba
import numpy as np
from numba import njit, prange

# omp first: thread-safe for concurrent callers, and avoids probing an old TBB
numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_Y_SALT = np.uint64(0xD1B54A32D192ED03)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(inline="always")
def _round_key(key, r):
    return _mix(key + np.uint64(r + 1) * _GOLDEN)


@njit(inline="always")
def _below(rkey, i, bound):
    # multiply-shift range reduction on the top 32 bits; bias < bound / 2**32
    u = _mix(rkey + np.uint64(i + 1) * _GOLDEN) >> _S32
    return np.int64((u * np.uint64(bound)) >> _S32)


@njit(inline="always")
def _draw(x, m, rkey, buf):
    """Fill buf[:m] with a random arrangement of x.

    m <= len(x): first m entries of a Fisher-Yates shuffle (no replacement).
    m > len(x): m draws with replacement.
    """
    n = x.shape[0]
    if m <= n:
        for i in range(n):
            buf[i] = x[i]
        for i in range(m):
            j = i + _below(rkey, i, n - i)
            t = buf[j]
            buf[j] = buf[i]
            buf[i] = t
    else:
        for i in range(m):
            buf[i] = x[_below(rkey, i, n)]


@njit(inline="always")
def _count(v, m):
    s = v[0]
    hi = s
    lo = s
    rp = 1
    rm = 1
    ties = 0
    for i in range(1, m):
        s += v[i]
        if s > hi:
            hi = s
            rp += 1
        elif s < lo:
            lo = s
            rm += 1
        elif s == hi or s == lo:
            ties += 1
    return rp, rm, ties


@njit(inline="always")
def _count_diff(a, b, m):
    s = a[0] - b[0]
    hi = s
    lo = s
    rp = 1
    rm = 1
    ties = 0
    for i in range(1, m):
        s += a[i] - b[i]
        if s > hi:
            hi = s
            rp += 1
        elif s < lo:
            lo = s
            rm += 1
        elif s == hi or s == lo:
            ties += 1
    return rp, rm, ties


@njit(cache=True)
def _totals(per_round):
    srp = 0
    srm = 0
    sq = 0
    st = 0
    for r in range(per_round.shape[0]):
        d = per_round[r, 0] - per_round[r, 1]
        srp += per_round[r, 0]
        srm += per_round[r, 1]
        sq += d * d
        st += per_round[r, 2]
    return srp, srm, sq, st


@njit(cache=True)
def draw_round(x, m, key, r):
    """The arrangement used by round ``r`` (exposed for cross-checking)."""
    buf = np.empty(max(x.shape[0], m))
    _draw(x, m, _round_key(key, r), buf)
    return buf[:m].copy()


@njit(cache=True)
def draw_round_pair(x, y, m, key, r):
    rk = _round_key(key, r)
    bx = np.empty(max(x.shape[0], m))
    by = np.empty(max(y.shape[0], m))
    _draw(x, m, rk, bx)
    _draw(y, m, _mix(rk ^ _Y_SALT), by)
    return bx[:m].copy(), by[:m].copy()


@njit(parallel=True, cache=True)
def perm_sums(x, m, p, key):
    """Sums over p rounds of (R+, R-, R0**2, ties) for one sample."""
    size = max(x.shape[0], m)
    per_round = np.empty((p, 3), dtype=np.int64)
    for r in prange(p):
        buf = np.empty(size)
        _draw(x, m, _round_key(key, r), buf)
        rp, rm, t = _count(buf, m)
        per_round[r, 0] = rp
        per_round[r, 1] = rm
        per_round[r, 2] = t
    return _totals(per_round)


@njit(parallel=True, cache=True)
def perm_sums_rows(X, m, p, keys):
    """perm_sums applied to each row of X with its own key."""
    rows = X.shape[0]
    size = max(X.shape[1], m)
    out = np.zeros((rows, 4), dtype=np.int64)
    for k in prange(rows):
        buf = np.empty(size)
        x = X[k]
        key = keys[k]
        srp = 0
        srm = 0
        sq = 0
        st = 0
        for r in range(p):
            _draw(x, m, _round_key(key, r), buf)
            rp, rm, t = _count(buf, m)
            srp += rp
            srm += rm
            sq += (rp - rm) * (rp - rm)
            st += t
        out[k, 0] = srp
        out[k, 1] = srm
        out[k, 2] = sq
        out[k, 3] = st
    return out


@njit(parallel=True, cache=True)
def unpaired_sums(x, y, m, p, key):
    """Sums of (R+, R-, R0**2, ties) of x-draw minus independent y-draw paths."""
    sx = max(x.shape[0], m)
    sy = max(y.shape[0], m)
    per_round = np.empty((p, 3), dtype=np.int64)
    for r in prange(p):
        bx = np.empty(sx)
        by = np.empty(sy)
        rk = _round_key(key, r)
        _draw(x, m, rk, bx)
        _draw(y, m, _mix(rk ^ _Y_SALT), by)
        rp, rm, t = _count_diff(bx, by, m)
        per_round[r, 0] = rp
        per_round[r, 1] = rm
        per_round[r, 2] = t
    return _totals(per_round)


@njit(parallel=True, cache=True)
def unpaired_sums_rows(X, Y, m, p, keys):
    rows = X.shape[0]
    out = np.zeros((rows, 4), dtype=np.int64)
    sx = max(X.shape[1], m)
    sy = max(Y.shape[1], m)
    for k in prange(rows):
        bx = np.empty(sx)
        by = np.empty(sy)
        key = keys[k]
        srp = 0
        srm = 0
        sq = 0
        st = 0
        for r in range(p):
            rk = _round_key(key, r)
            _draw(X[k], m, rk, bx)
            _draw(Y[k], m, _mix(rk ^ _Y_SALT), by)
            rp, rm, t = _count_diff(bx, by, m)
            srp += rp
            srm += rm
            sq += (rp - rm) * (rp - rm)
            st += t
        out[k, 0] = srp
        out[k, 1] = srm
        out[k, 2] = sq
        out[k, 3] = st
    return out
