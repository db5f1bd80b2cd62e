"""Numeric hot kernels: edit-distance DP and greedy coverage selection.

Two interchangeable backends exist for each kernel: a numba ``@njit``
version and a pure-numpy fallback. The active backend is chosen by the
``CLAIMEDIT_KERNEL`` environment variable (``numba`` or ``numpy``) read at
import time; it defaults to numba when importable. ``set_backend`` flips
it at runtime, which the benchmark and the tests use to compare paths.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap(args[0]) if args and callable(args[0]) else wrap


VALID_BACKENDS = ("numba", "numpy")


def _initial_backend() -> str:
    requested = os.environ.get("CLAIMEDIT_KERNEL", "").strip().lower()
    if requested:
        if requested not in VALID_BACKENDS:
            raise ValueError(
                f"CLAIMEDIT_KERNEL must be one of {VALID_BACKENDS}, got {requested!r}"
            )
        if requested == "numba" and not HAS_NUMBA:
            raise ValueError("CLAIMEDIT_KERNEL=numba but numba is not importable")
        return requested
    return "numba" if HAS_NUMBA else "numpy"


_BACKEND = _initial_backend()


def active_backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    global _BACKEND
    if name not in VALID_BACKENDS:
        raise ValueError(f"backend must be one of {VALID_BACKENDS}, got {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    _BACKEND = name


# --- Levenshtein over code-point arrays -----------------------------------


@njit(cache=True)
def _lev_numba(a: np.ndarray, b: np.ndarray) -> int:  # pragma: no cover - jitted
    n = b.shape[0]
    prev = np.empty(n + 1, np.int64)
    cur = np.empty(n + 1, np.int64)
    for j in range(n + 1):
        prev[j] = j
    for i in range(1, a.shape[0] + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, n + 1):
            cost = 0 if b[j - 1] == ai else 1
            best = prev[j - 1] + cost
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            cur[j] = best
        prev, cur = cur, prev
    return prev[n]


def _lev_numpy(a: np.ndarray, b: np.ndarray) -> int:
    n = b.shape[0]
    if a.shape[0] == 0:
        return int(n)
    if n == 0:
        return int(a.shape[0])
    idx = np.arange(n + 1, dtype=np.int64)
    prev = idx.copy()
    cur = np.empty(n + 1, dtype=np.int64)
    for i in range(1, a.shape[0] + 1):
        cur[0] = i
        np.minimum(prev[:-1] + (b != a[i - 1]), prev[1:] + 1, out=cur[1:])
        # within-row insertions: cur[j] = min_k<=j cur[k] + (j - k)
        np.minimum(cur, np.minimum.accumulate(cur - idx) + idx, out=cur)
        prev, cur = cur, prev
    return int(prev[n])


def codepoints(text: str) -> np.ndarray:
    """Unicode scalar values of ``text`` as an int32 array."""
    return np.array([ord(c) for c in text], dtype=np.int32)


def levenshtein_codes(a: np.ndarray, b: np.ndarray) -> int:
    """Unit-cost edit distance between two code-point arrays."""
    if _BACKEND == "numba":
        return int(_lev_numba(a, b))
    return _lev_numpy(a, b)


# --- Greedy max-coverage selection -----------------------------------------
#
# Objective: coverage(S) = sum over rows i of max_{j in S} scores[i, j].
# The first pick maximizes its column sum; later picks maximize marginal
# gain, stopping once the best gain drops to <= 0. Ties go to the lowest
# column index in both backends.


@njit(cache=True)
def _greedy_numba(scores: np.ndarray, budget: int):  # pragma: no cover - jitted
    m, n = scores.shape
    limit = budget if budget < n else n
    picks = np.empty(limit, np.int64)
    chosen = np.zeros(n, np.bool_)
    cur = np.empty(m, np.float64)
    count = 0
    for step in range(limit):
        best_gain = -np.inf
        best_j = -1
        for j in range(n):
            if chosen[j]:
                continue
            gain = 0.0
            if step == 0:
                for i in range(m):
                    gain += scores[i, j]
            else:
                for i in range(m):
                    diff = scores[i, j] - cur[i]
                    if diff > 0.0:
                        gain += diff
            if gain > best_gain:
                best_gain = gain
                best_j = j
        if count > 0 and best_gain <= 0.0:
            break
        picks[count] = best_j
        chosen[best_j] = True
        count += 1
        if count == 1:
            for i in range(m):
                cur[i] = scores[i, best_j]
        else:
            for i in range(m):
                if scores[i, best_j] > cur[i]:
                    cur[i] = scores[i, best_j]
    coverage = 0.0
    for i in range(m):
        coverage += cur[i]
    return picks[:count], coverage


def _greedy_numpy(scores: np.ndarray, budget: int):
    m, n = scores.shape
    limit = min(budget, n)
    picks: list[int] = []
    chosen = np.zeros(n, dtype=bool)
    cur = np.full(m, -np.inf)
    for step in range(limit):
        if step == 0:
            gains = scores.sum(axis=0)
        else:
            gains = np.maximum(scores - cur[:, None], 0.0).sum(axis=0)
        gains = np.where(chosen, -np.inf, gains)
        j = int(np.argmax(gains))
        if picks and gains[j] <= 0.0:
            break
        picks.append(j)
        chosen[j] = True
        cur = np.maximum(cur, scores[:, j])
    return np.asarray(picks, dtype=np.int64), float(cur.sum())


def greedy_select(scores: np.ndarray, budget: int) -> tuple[np.ndarray, float]:
    """Greedy coverage-maximizing column selection.

    Returns (picked column indices in selection order, coverage of the
    selection). ``scores`` must be a finite float64 matrix with at least
    one row and column; ``budget`` >= 1.
    """
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] < 1 or scores.shape[1] < 1:
        raise ValueError("scores must be a non-degenerate 2-D matrix")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if _BACKEND == "numba":
        picks, coverage = _greedy_numba(scores, budget)
        return np.asarray(picks), float(coverage)
    return _greedy_numpy(scores, budget)
