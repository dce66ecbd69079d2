"""Hot numeric kernels: edit distance and agreement-bootstrap inner loops.

Both kernels ship in two interchangeable implementations: a numba
``@njit`` version (default when numba imports) and a vectorized pure-numpy
version.  Set ``GROUPSIGHT_DISABLE_NUMBA=1`` to force the numpy path;
``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE_FLAG = os.environ.get("GROUPSIGHT_DISABLE_NUMBA", "").strip().lower()
_NUMBA_DISABLED = _DISABLE_FLAG in {"1", "true", "yes", "on"}

if not _NUMBA_DISABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        njit = None
else:
    njit = None


def using_numba() -> bool:
    """True when the jitted kernel path is active."""
    return njit is not None


# ---------------------------------------------------------------------------
# Levenshtein distance
# ---------------------------------------------------------------------------


def _levenshtein_loop(a: np.ndarray, b: np.ndarray) -> int:
    # Classic two-row DP; compiled by numba when available.
    n = b.shape[0]
    prev = np.arange(n + 1, dtype=np.int64)
    cur = np.empty(n + 1, dtype=np.int64)
    for i in range(a.shape[0]):
        cur[0] = i + 1
        ca = a[i]
        for j in range(1, n + 1):
            cost = 0 if b[j - 1] == ca else 1
            best = prev[j - 1] + cost
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            cur[j] = best
        prev, cur = cur, prev
    return int(prev[n])


if njit is not None:
    _levenshtein_jit = njit(cache=True)(_levenshtein_loop)


def _levenshtein_numpy(a: np.ndarray, b: np.ndarray) -> int:
    # Row-vectorized DP.  The insertion recurrence cur[j] = min(cand[k] + (j-k))
    # over k <= j is a running minimum of (cand - index), since each insertion
    # step costs exactly 1.
    n = b.shape[0]
    prev = np.arange(n + 1, dtype=np.int64)
    idx = np.arange(n + 1, dtype=np.int64)
    for i in range(a.shape[0]):
        cost = (b != a[i]).astype(np.int64)
        cand = np.empty(n + 1, dtype=np.int64)
        cand[0] = i + 1
        cand[1:] = np.minimum(prev[1:] + 1, prev[:-1] + cost)
        cur = np.minimum.accumulate(cand - idx) + idx
        prev = cur
    return int(prev[n])


def levenshtein(a: str, b: str) -> int:
    """Edit distance between two strings (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    arr_a = np.array([ord(c) for c in a], dtype=np.int32)
    arr_b = np.array([ord(c) for c in b], dtype=np.int32)
    if njit is not None:
        return int(_levenshtein_jit(arr_a, arr_b))
    return _levenshtein_numpy(arr_a, arr_b)


def levenshtein_similarity(a: str, b: str) -> float:
    """Normalized similarity 1 - dist/max(len); 1.0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


# ---------------------------------------------------------------------------
# Interval-agreement bootstrap
# ---------------------------------------------------------------------------
#
# Each rated unit u contributes sufficient statistics over its pairable
# values x_1..x_m (m >= 2):
#   m_u, s1_u = sum(x), s2_u = sum(x^2),
#   do_u = sum over ordered pairs i != j of (x_i - x_j)^2 / (m_u - 1)
#        = 2 * (m_u * s2_u - s1_u^2) / (m_u - 1).
# For any multiset S of units:
#   n = sum m_u,  D_o = sum(do_u) / n,
#   D_e = 2 * (n * sum(s2_u) - (sum(s1_u))^2) / (n * (n - 1)),
#   alpha = 1 - D_o / D_e   (NaN when D_e <= 0).


def alpha_from_stats(m: np.ndarray, s1: np.ndarray, s2: np.ndarray, do: np.ndarray) -> float:
    n = float(m.sum())
    total_s1 = float(s1.sum())
    total_s2 = float(s2.sum())
    de = 2.0 * (n * total_s2 - total_s1 * total_s1) / (n * (n - 1.0))
    if de <= 0.0:
        return float("nan")
    return 1.0 - (float(do.sum()) / n) / de


def _bootstrap_alphas_loop(
    draws: np.ndarray, m: np.ndarray, s1: np.ndarray, s2: np.ndarray, do: np.ndarray
) -> np.ndarray:
    iters, width = draws.shape
    out = np.empty(iters, dtype=np.float64)
    for it in range(iters):
        n = 0.0
        t1 = 0.0
        t2 = 0.0
        td = 0.0
        for j in range(width):
            u = draws[it, j]
            n += m[u]
            t1 += s1[u]
            t2 += s2[u]
            td += do[u]
        de = 2.0 * (n * t2 - t1 * t1) / (n * (n - 1.0))
        if de <= 0.0:
            out[it] = np.nan
        else:
            out[it] = 1.0 - (td / n) / de
    return out


if njit is not None:
    _bootstrap_alphas_jit = njit(cache=True)(_bootstrap_alphas_loop)


def _bootstrap_alphas_numpy(
    draws: np.ndarray, m: np.ndarray, s1: np.ndarray, s2: np.ndarray, do: np.ndarray
) -> np.ndarray:
    n = m[draws].sum(axis=1)
    t1 = s1[draws].sum(axis=1)
    t2 = s2[draws].sum(axis=1)
    td = do[draws].sum(axis=1)
    de = 2.0 * (n * t2 - t1 * t1) / (n * (n - 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        alphas = 1.0 - (td / n) / de
    alphas[de <= 0.0] = np.nan
    return alphas


def bootstrap_alphas(
    draws: np.ndarray, m: np.ndarray, s1: np.ndarray, s2: np.ndarray, do: np.ndarray
) -> np.ndarray:
    """Alpha per bootstrap resample; NaN marks resamples with zero expected disagreement.

    ``draws`` is an (iterations, n_units) int64 matrix of unit indices.
    """
    if njit is not None:
        return _bootstrap_alphas_jit(draws, m, s1, s2, do)
    return _bootstrap_alphas_numpy(draws, m, s1, s2, do)
