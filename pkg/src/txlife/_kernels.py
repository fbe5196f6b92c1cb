"""Hot inner loops, each in a numba and a pure-numpy flavour.

The numba versions are used when numba imports cleanly and the environment
variable ``TXLIFE_NO_NUMBA`` is unset (or ``0``). Setting it to ``1`` forces the
numpy path, which is also what runs on platforms without numba. Both flavours
are importable directly (``nb_*`` / ``np_*``) so tests can check them against
each other.

All kernels take integer node ids (dense, ``int64``) and CSR-style segment
offsets: segment ``k`` covers edges ``offsets[k]:offsets[k+1]``.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("TXLIFE_NO_NUMBA", "0") in ("", "0")
BACKEND = "numba" if USE_NUMBA else "numpy"


def _njit(fn):
    if not HAVE_NUMBA:
        return None
    return numba.njit(cache=True, nogil=True)(fn)


def segment_offsets(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run-length split of a non-decreasing key array.

    Returns ``(unique_keys, offsets)`` with ``len(offsets) == len(unique_keys) + 1``.
    """
    keys = np.asarray(keys, dtype=np.int64)
    if keys.size == 0:
        return keys.copy(), np.zeros(1, dtype=np.int64)
    starts = np.flatnonzero(np.diff(keys)) + 1
    offsets = np.concatenate(([0], starts, [keys.size])).astype(np.int64)
    return keys[offsets[:-1]], offsets


# -- distinct incident nodes per segment ------------------------------------

def _py_distinct_per_segment(offsets, src, dst, n_nodes):
    nseg = offsets.shape[0] - 1
    out = np.zeros(nseg, dtype=np.int64)
    stamp = np.full(n_nodes, -1, dtype=np.int64)
    for k in range(nseg):
        c = 0
        for e in range(offsets[k], offsets[k + 1]):
            u = src[e]
            if stamp[u] != k:
                stamp[u] = k
                c += 1
            v = dst[e]
            if stamp[v] != k:
                stamp[v] = k
                c += 1
        out[k] = c
    return out


def np_distinct_per_segment(offsets, src, dst, n_nodes):
    nseg = len(offsets) - 1
    if nseg <= 0:
        return np.zeros(0, dtype=np.int64)
    seg = np.repeat(np.arange(nseg, dtype=np.int64), np.diff(offsets))
    n = max(int(n_nodes), 1)
    codes = np.unique(np.concatenate((seg * n + src, seg * n + dst)))
    return np.bincount(codes // n, minlength=nseg).astype(np.int64)


nb_distinct_per_segment = _njit(_py_distinct_per_segment)


# -- first segment in which each node appears ------------------------------

def _py_new_nodes_per_segment(offsets, src, dst, n_nodes):
    nseg = offsets.shape[0] - 1
    out = np.zeros(nseg, dtype=np.int64)
    seen = np.zeros(n_nodes, dtype=np.bool_)
    for k in range(nseg):
        c = 0
        for e in range(offsets[k], offsets[k + 1]):
            u = src[e]
            if not seen[u]:
                seen[u] = True
                c += 1
            v = dst[e]
            if not seen[v]:
                seen[v] = True
                c += 1
        out[k] = c
    return out


def np_new_nodes_per_segment(offsets, src, dst, n_nodes):
    nseg = len(offsets) - 1
    if nseg <= 0:
        return np.zeros(0, dtype=np.int64)
    seg = np.repeat(np.arange(nseg, dtype=np.int64), np.diff(offsets))
    first = np.full(max(int(n_nodes), 1), nseg, dtype=np.int64)
    np.minimum.at(first, src, seg)
    np.minimum.at(first, dst, seg)
    return np.bincount(first[first < nseg], minlength=nseg).astype(np.int64)


nb_new_nodes_per_segment = _njit(_py_new_nodes_per_segment)


# -- first post-peak day at or below a threshold -----------------------------

def _py_first_at_or_below(values, start, den, bound):
    # exact integer test values[d] * den <= bound; caller rules out int64 overflow
    for d in range(start, values.shape[0]):
        if values[d] * den <= bound:
            return d
    return -1


def np_first_at_or_below(values, start, den, bound):
    hits = np.flatnonzero(np.asarray(values[start:], dtype=np.int64) * den <= bound)
    return start + int(hits[0]) if hits.size else -1


nb_first_at_or_below = _njit(_py_first_at_or_below)


# -- Pearson correlation -----------------------------------------------------

def _py_pearson(x, y):
    # two-pass, mean-centred; NaN when either side is exactly constant
    n = x.shape[0]
    if n < 2:
        return np.nan
    cx = True
    cy = True
    for i in range(1, n):
        if x[i] != x[0]:
            cx = False
        if y[i] != y[0]:
            cy = False
    if cx or cy:
        return np.nan
    mx = 0.0
    my = 0.0
    for i in range(n):
        mx += x[i]
        my += y[i]
    mx /= n
    my /= n
    sxx = 0.0
    syy = 0.0
    sxy = 0.0
    for i in range(n):
        dx = x[i] - mx
        dy = y[i] - my
        sxx += dx * dx
        syy += dy * dy
        sxy += dx * dy
    return sxy / (math.sqrt(sxx) * math.sqrt(syy))


def np_pearson(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or np.all(x == x[0]) or np.all(y == y[0]):
        return math.nan
    dx = x - x.mean()
    dy = y - y.mean()
    return float(np.dot(dx, dy) / (math.sqrt(np.dot(dx, dx)) * math.sqrt(np.dot(dy, dy))))


nb_pearson = _njit(_py_pearson)


def _make_all_pairs(pearson):
    def all_pairs_pearson(flat, offsets, starts, min_overlap):
        # series k occupies flat[offsets[k]:offsets[k+1]] and begins at day starts[k]
        m = offsets.shape[0] - 1
        npairs = m * (m - 1) // 2
        rho = np.full(npairs, np.nan)
        overlap = np.zeros(npairs, dtype=np.int64)
        p = 0
        for i in range(m):
            si = starts[i]
            ei = si + (offsets[i + 1] - offsets[i])
            for j in range(i + 1, m):
                sj = starts[j]
                ej = sj + (offsets[j + 1] - offsets[j])
                lo = max(si, sj)
                hi = min(ei, ej)
                ov = hi - lo
                if ov > 0:
                    overlap[p] = ov
                    if ov >= min_overlap:
                        a = offsets[i] + (lo - si)
                        b = offsets[j] + (lo - sj)
                        rho[p] = pearson(flat[a:a + ov], flat[b:b + ov])
                p += 1
        return rho, overlap

    return all_pairs_pearson


np_all_pairs_pearson = _make_all_pairs(np_pearson)
nb_all_pairs_pearson = _njit(_make_all_pairs(nb_pearson)) if HAVE_NUMBA else None

if USE_NUMBA:
    distinct_per_segment = nb_distinct_per_segment
    new_nodes_per_segment = nb_new_nodes_per_segment
    first_at_or_below = nb_first_at_or_below
    pearson = nb_pearson
    all_pairs_pearson = nb_all_pairs_pearson
else:
    distinct_per_segment = np_distinct_per_segment
    new_nodes_per_segment = np_new_nodes_per_segment
    first_at_or_below = np_first_at_or_below
    pearson = np_pearson
    all_pairs_pearson = np_all_pairs_pearson
