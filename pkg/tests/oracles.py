"""Independent reference implementations used to check production code.

Everything here is deliberately written the slow, obvious way (full DP
matrices, exhaustive enumeration, direct per-pair client calls) and
shares no code with the package internals it verifies.
"""

from __future__ import annotations

import itertools
import unicodedata


def oracle_levenshtein(a: str, b: str) -> int:
    """Full-matrix unit-cost edit distance over NFC code points."""
    a = unicodedata.normalize("NFC", a)
    b = unicodedata.normalize("NFC", b)
    rows, cols = len(a) + 1, len(b) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[rows - 1][cols - 1]


def oracle_preservation(x: str, y: str) -> float:
    x_n = unicodedata.normalize("NFC", x)
    y_n = unicodedata.normalize("NFC", y)
    if not x_n:
        return 1.0 if not y_n else 0.0
    return max(1.0 - oracle_levenshtein(x_n, y_n) / len(x_n), 0.0)


def oracle_coverage(scores: list[list[float]], subset: set[int]) -> float:
    """Row-by-row max over the subset, summed, in pure Python."""
    total = 0.0
    for row in scores:
        total += max(row[j] for j in subset)
    return total


def oracle_best_subset(scores: list[list[float]], budget: int) -> tuple[float, set[int]]:
    """Exhaustive search over every non-empty subset of size <= budget."""
    n = len(scores[0])
    best_value = float("-inf")
    best: set[int] = set()
    for size in range(1, min(budget, n) + 1):
        for combo in itertools.combinations(range(n), size):
            value = oracle_coverage(scores, set(combo))
            if value > best_value:
                best_value = value
                best = set(combo)
    return best_value, best


def oracle_mean_of_maxes(sentences: list[str], evidence_texts: list[str], nli) -> float:
    """Attribution the brute-force way: one client call per pair."""
    per_sentence = []
    for s in sentences:
        per_sentence.append(max(nli.nli([(e, s)])[0] for e in evidence_texts))
    return sum(per_sentence) / len(per_sentence)


def oracle_f1(a: float, p: float) -> float:
    return 0.0 if a + p == 0 else 2 * a * p / (a + p)
