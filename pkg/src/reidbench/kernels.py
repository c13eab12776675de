"""Numeric hot kernels: embedding nearest-neighbor search, distance rows,
and Jaro similarity on code-point arrays.

Each kernel has a JIT build and a same-signature pure numpy/Python
fallback. The fallback is selected when REIDBENCH_NO_NUMBA=1 is set or
when numba is unavailable; callers import the public names and never
care which build they got.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("REIDBENCH_NO_NUMBA", "") != "1"


def _nearest_vocab_py(queries: np.ndarray, emb: np.ndarray) -> np.ndarray:
    """Index of the Euclidean nearest embedding row for each query row."""
    emb_sq = np.einsum("ij,ij->i", emb, emb)
    out = np.empty(queries.shape[0], dtype=np.int64)
    # chunked so T x V never materializes for large inputs
    step = max(1, int(4e7) // max(1, emb.shape[0]))
    for start in range(0, queries.shape[0], step):
        q = queries[start : start + step]
        d = emb_sq[None, :] - 2.0 * (q @ emb.T)
        out[start : start + step] = np.argmin(d, axis=1)
    return out


def _sq_dist_row_py(vec: np.ndarray, emb: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance from one vector to every embedding row."""
    diff = emb - vec[None, :]
    return np.einsum("ij,ij->i", diff, diff)


def _jaro_codes_py(a: np.ndarray, b: np.ndarray) -> float:
    """Jaro similarity of two code-point arrays."""
    la, lb = len(a), len(b)
    if la == 0 and lb == 0:
        return 1.0
    if la == 0 or lb == 0:
        return 0.0
    window = max(la, lb) // 2 - 1
    if window < 0:
        window = 0
    a_match = np.zeros(la, dtype=np.bool_)
    b_match = np.zeros(lb, dtype=np.bool_)
    matches = 0
    for i in range(la):
        lo = i - window if i - window > 0 else 0
        hi = i + window + 1 if i + window + 1 < lb else lb
        for j in range(lo, hi):
            if not b_match[j] and a[i] == b[j]:
                a_match[i] = True
                b_match[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    transpositions = 0
    k = 0
    for i in range(la):
        if a_match[i]:
            while not b_match[k]:
                k += 1
            if a[i] != b[k]:
                transpositions += 1
            k += 1
    transpositions //= 2
    m = float(matches)
    return (m / la + m / lb + (m - transpositions) / m) / 3.0


def _lcs_len_py(a: np.ndarray, b: np.ndarray) -> int:
    """Longest common subsequence length of two int sequences."""
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0
    prev = [0] * (lb + 1)
    cur = [0] * (lb + 1)
    for i in range(la):
        ai = a[i]
        for j in range(lb):
            if ai == b[j]:
                cur[j + 1] = prev[j] + 1
            else:
                cur[j + 1] = cur[j] if cur[j] >= prev[j + 1] else prev[j + 1]
        prev, cur = cur, prev
    return prev[lb]


if HAS_NUMBA:

    @njit(cache=True, parallel=True)
    def _nearest_vocab_nb(queries, emb):  # pragma: no cover - exercised via dispatch
        t, d = queries.shape
        v = emb.shape[0]
        out = np.empty(t, dtype=np.int64)
        for i in prange(t):
            best = 0
            best_d = np.inf
            for j in range(v):
                acc = 0.0
                for k in range(d):
                    diff = queries[i, k] - emb[j, k]
                    acc += diff * diff
                if acc < best_d:
                    best_d = acc
                    best = j
            out[i] = best
        return out

    @njit(cache=True)
    def _sq_dist_row_nb(vec, emb):  # pragma: no cover - exercised via dispatch
        v, d = emb.shape
        out = np.empty(v, dtype=np.float64)
        for j in range(v):
            acc = 0.0
            for k in range(d):
                diff = vec[k] - emb[j, k]
                acc += diff * diff
            out[j] = acc
        return out

    @njit(cache=True)
    def _jaro_codes_nb(a, b):  # pragma: no cover - exercised via dispatch
        la, lb = len(a), len(b)
        if la == 0 and lb == 0:
            return 1.0
        if la == 0 or lb == 0:
            return 0.0
        window = max(la, lb) // 2 - 1
        if window < 0:
            window = 0
        a_match = np.zeros(la, dtype=np.bool_)
        b_match = np.zeros(lb, dtype=np.bool_)
        matches = 0
        for i in range(la):
            lo = i - window if i - window > 0 else 0
            hi = i + window + 1 if i + window + 1 < lb else lb
            for j in range(lo, hi):
                if not b_match[j] and a[i] == b[j]:
                    a_match[i] = True
                    b_match[j] = True
                    matches += 1
                    break
        if matches == 0:
            return 0.0
        transpositions = 0
        k = 0
        for i in range(la):
            if a_match[i]:
                while not b_match[k]:
                    k += 1
                if a[i] != b[k]:
                    transpositions += 1
                k += 1
        transpositions //= 2
        m = float(matches)
        return (m / la + m / lb + (m - transpositions) / m) / 3.0

    @njit(cache=True)
    def _lcs_len_nb(a, b):  # pragma: no cover - exercised via dispatch
        la, lb = len(a), len(b)
        if la == 0 or lb == 0:
            return 0
        prev = np.zeros(lb + 1, dtype=np.int64)
        cur = np.zeros(lb + 1, dtype=np.int64)
        for i in range(la):
            ai = a[i]
            for j in range(lb):
                if ai == b[j]:
                    cur[j + 1] = prev[j] + 1
                elif cur[j] >= prev[j + 1]:
                    cur[j + 1] = cur[j]
                else:
                    cur[j + 1] = prev[j + 1]
            tmp = prev
            prev = cur
            cur = tmp
        return int(prev[lb])


if USE_NUMBA:
    nearest_vocab = _nearest_vocab_nb
    sq_dist_row = _sq_dist_row_nb
    _jaro_codes = _jaro_codes_nb
    _lcs_len = _lcs_len_nb
else:
    nearest_vocab = _nearest_vocab_py
    sq_dist_row = _sq_dist_row_py
    _jaro_codes = _jaro_codes_py
    _lcs_len = _lcs_len_py


def jaro_codes(a: np.ndarray, b: np.ndarray) -> float:
    return float(_jaro_codes(a, b))


def lcs_len(a: np.ndarray, b: np.ndarray) -> int:
    return int(_lcs_len(a, b))
