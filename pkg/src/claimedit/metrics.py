"""Attribution, preservation, and edit-category metrics.

Attribution of a statement is the mean over its sentences of the best
evidence entailment score; preservation is one minus the normalized
character edit distance, clamped at zero; the two combine by harmonic
mean. Category thresholds follow the edit taxonomy used in evaluation:
a Huge edit rewrites most of the text, a Bad edit lowers attribution,
an Unnecessary edit is a Bad edit to an already well-attributed claim,
and a Good edit raises attribution while preserving the original.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels
from .core import AttributionReport, Claim, EditCategory, nfc
from .errors import EmptyTextError

HUGE_PRESERVATION_BELOW = 0.5
BAD_ATTRIBUTION_DROP = -0.1
UNNECESSARY_PRIOR_ATTRIBUTION = 0.9
GOOD_ATTRIBUTION_GAIN = 0.3
GOOD_PRESERVATION_ABOVE = 0.7

# Tokens that end with '.' without ending a sentence.
_ABBREVIATIONS = frozenset(
    {
        "Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "Rev.", "Gen.", "Sen.", "Rep.",
        "St.", "Mt.", "No.", "Nos.", "Jr.", "Sr.", "Inc.", "Ltd.", "Co.",
        "Corp.", "vs.", "etc.", "e.g.", "i.e.", "cf.", "al.", "approx.",
        "U.S.", "U.K.", "U.N.", "D.C.", "a.m.", "p.m.",
        "Jan.", "Feb.", "Mar.", "Apr.", "Jun.", "Jul.", "Aug.", "Sep.",
        "Sept.", "Oct.", "Nov.", "Dec.",
    }
)

_TERMINALS = ".!?"
_CLOSERS = "\"')]”’"


@dataclass(frozen=True)
class SentenceSplit:
    """Sentences of a text plus their (start, end) offsets into it."""

    sentences: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class AttributionScore:
    """Per-sentence best-evidence scores and their arithmetic mean."""

    per_sentence: tuple[float, ...]
    overall: float

    @classmethod
    def from_sentence_scores(cls, scores: list[float]) -> "AttributionScore":
        return cls(per_sentence=tuple(scores), overall=sum(scores) / len(scores))


def _token_before(text: str, end: int) -> str:
    """The whitespace-delimited token ending at index ``end`` (inclusive)."""
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start : end + 1]


def split_sentences(text: str) -> SentenceSplit:
    """Deterministic rule-based sentence segmentation.

    A sentence ends at '.', '!' or '?' (plus attached closing quotes or
    brackets) when followed by whitespace and an uppercase letter or
    digit, unless the terminal period belongs to a known abbreviation or
    sits inside a decimal number.
    """
    if not text.strip():
        raise EmptyTextError("cannot split empty text")
    boundaries: list[int] = []  # index one past each sentence's last char
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in _TERMINALS:
            continue
        end = i
        while end + 1 < n and text[end + 1] in _CLOSERS:
            end += 1
        nxt = end + 1
        if nxt >= n or not text[nxt].isspace():
            continue
        follow = nxt
        while follow < n and text[follow].isspace():
            follow += 1
        if follow >= n or not (text[follow].isupper() or text[follow].isdigit()):
            continue
        if ch == ".":
            if _token_before(text, i) in _ABBREVIATIONS:
                continue
            # decimal protection: digit '.' digit never splits
            if 0 < i < n - 1 and text[i - 1].isdigit() and text[i + 1].isdigit():
                continue
        boundaries.append(end + 1)

    sentences: list[str] = []
    spans: list[tuple[int, int]] = []
    cursor = 0
    for b in boundaries + [n]:
        segment = text[cursor:b]
        stripped = segment.strip()
        if stripped:
            start = cursor + len(segment) - len(segment.lstrip())
            spans.append((start, start + len(stripped)))
            sentences.append(stripped)
        cursor = b
    return SentenceSplit(sentences=tuple(sentences), spans=tuple(spans))


def sentence_attribution(sentence: str, report: AttributionReport, nli) -> float:
    """Best entailment score of ``sentence`` over the report's evidence."""
    scores = nli.nli([(e.text, sentence) for e in report.evidence])
    return max(scores)


def statement_attribution(claim: Claim, report: AttributionReport, nli) -> AttributionScore:
    """Mean over the claim's sentences of each sentence's best evidence score.

    All (evidence, sentence) pairs go to the NLI client in one batch and
    are folded back by index, so the result is independent of how the
    client schedules the work.
    """
    split = split_sentences(claim.text)
    evidence = report.evidence
    pairs = [(e.text, s) for s in split.sentences for e in evidence]
    flat = nli.nli(pairs)
    per_sentence = [
        max(flat[k * len(evidence) : (k + 1) * len(evidence)])
        for k in range(len(split.sentences))
    ]
    return AttributionScore.from_sentence_scores(per_sentence)


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over Unicode scalar values of NFC-normalized text."""
    return _kernels.levenshtein_codes(
        _kernels.codepoints(nfc(a)), _kernels.codepoints(nfc(b))
    )


def preservation(x: str, y: str) -> float:
    """How much of ``x`` survives in ``y``: max(1 - Lev(x, y)/len(x), 0).

    Lengths count Unicode scalar values after NFC. An empty ``x`` is fully
    preserved only by an empty ``y``.
    """
    x_n, y_n = nfc(x), nfc(y)
    if len(x_n) == 0:
        return 1.0 if len(y_n) == 0 else 0.0
    return max(1.0 - levenshtein(x_n, y_n) / len(x_n), 0.0)


def f1_ap(attr_after: float, pres: float) -> float:
    """Harmonic mean of post-edit attribution and preservation; 0 at (0, 0)."""
    for name, v in (("attr_after", attr_after), ("pres", pres)):
        if not (0.0 <= v <= 1.0) or not math.isfinite(v):
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    if attr_after + pres == 0.0:
        return 0.0
    return 2.0 * attr_after * pres / (attr_after + pres)


def categorize_edit(attr_before: float, attr_after: float, pres: float) -> frozenset[EditCategory]:
    """Classify an edit by its attribution delta and preservation."""
    for name, v in (("attr_before", attr_before), ("attr_after", attr_after), ("pres", pres)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    cats: set[EditCategory] = set()
    delta = attr_after - attr_before
    if pres < HUGE_PRESERVATION_BELOW:
        cats.add(EditCategory.HUGE)
    if delta < BAD_ATTRIBUTION_DROP:
        cats.add(EditCategory.BAD)
        if attr_before > UNNECESSARY_PRIOR_ATTRIBUTION:
            cats.add(EditCategory.UNNECESSARY)
    if delta > GOOD_ATTRIBUTION_GAIN and pres > GOOD_PRESERVATION_ABOVE:
        cats.add(EditCategory.GOOD)
    if not cats:
        cats.add(EditCategory.OTHER)
    return frozenset(cats)
