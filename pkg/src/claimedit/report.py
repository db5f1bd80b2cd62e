"""Attribution-report construction by coverage-maximizing evidence selection.

Coverage of an evidence subset is the sum over queries of the best
relevance score any selected snippet achieves for that query. Selection
is greedy with deterministic lowest-index tie-breaking, which carries
the standard (1 - 1/e) guarantee for this monotone submodular objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import AttributionReport, EvidenceSnippet, Query, normalized_text_key
from .errors import EmptyEvidenceError


@dataclass(frozen=True)
class RelevanceMatrix:
    """Query-by-evidence relevance scores with the objects they describe."""

    queries: tuple[Query, ...]
    evidence: tuple[EvidenceSnippet, ...]
    scores: np.ndarray  # shape (len(queries), len(evidence)), float64

    def __post_init__(self):
        object.__setattr__(self, "queries", tuple(self.queries))
        object.__setattr__(self, "evidence", tuple(self.evidence))
        scores = np.ascontiguousarray(self.scores, dtype=np.float64)
        if scores.shape != (len(self.queries), len(self.evidence)):
            raise ValueError(
                f"scores shape {scores.shape} does not match "
                f"{len(self.queries)} queries x {len(self.evidence)} evidence"
            )
        if scores.size and not np.all(np.isfinite(scores)):
            raise ValueError("relevance scores must be finite")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)


def coverage(matrix: RelevanceMatrix, subset: set[int] | frozenset[int]) -> float:
    """Sum over queries of the best score among the subset's snippets."""
    if not subset:
        raise ValueError("subset must be non-empty")
    cols = sorted(subset)
    if cols[0] < 0 or cols[-1] >= len(matrix.evidence):
        raise ValueError(f"evidence index out of range: {cols}")
    return float(matrix.scores[:, cols].max(axis=1).sum())


def dedupe_evidence(evidence: list[EvidenceSnippet]) -> list[EvidenceSnippet]:
    """Drop snippets whose normalized text was already seen; order preserved."""
    seen: set[str] = set()
    out: list[EvidenceSnippet] = []
    for e in evidence:
        key = normalized_text_key(e.text)
        if key in seen:
            continue
        seen.add(key)
        out.append(e)
    return out


def select_report(matrix: RelevanceMatrix, budget: int = 5) -> AttributionReport:
    """Greedily pick up to ``budget`` snippets maximizing coverage.

    Picking stops at min(budget, n) snippets or as soon as the best
    marginal gain is <= 0 (after at least one pick). Ties break toward
    the lowest evidence index. The returned report lists snippets in
    selection order with the selection's coverage.
    """
    if len(matrix.evidence) == 0:
        raise EmptyEvidenceError("cannot select a report from zero evidence")
    if len(matrix.queries) == 0:
        raise ValueError("matrix must have at least one query")
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    picks, cov = _kernels.greedy_select(matrix.scores, budget)
    if not math.isfinite(cov):
        raise ValueError("selection produced non-finite coverage")
    return AttributionReport(
        evidence=tuple(matrix.evidence[int(j)] for j in picks),
        coverage=cov,
    )
