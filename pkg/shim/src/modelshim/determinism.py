"""Deterministic fixture-mode behavior.

This module re-states the offline mock contract of the pipeline package:
the same hash construction, identity rule, prompt recognition, and text
transforms. It must never drift; the cross-package conformance tests
compare its outputs byte for byte against the pipeline's own mocks, so
any change here (or there) fails loudly.
"""

from __future__ import annotations

import hashlib
import unicodedata

NLI_IDENTITY_SCORE = 0.95

SUMMARIZE_PREFIX = "Summarize all the pieces of text."
CORRUPT_PREFIX = "Corrupt the text by first generating a reasoning"
QUERY_PREFIX = "Write web search queries"

SEGMENT_CLAIM_PREFIX = "claim: "
SEGMENT_EVIDENCE_SEPARATOR = " evidence: "
SEGMENT_WORD_CAP = 512


class UnknownPromptError(ValueError):
    """Fixture mode cannot answer prompts outside the known templates."""


def stable_unit_hash(*parts: str) -> float:
    digest = hashlib.blake2b("\x1f".join(parts).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2.0**64


def score_pair(query: str, passage: str) -> float:
    return stable_unit_hash("score", query, passage)


def nli_pair(premise: str, hypothesis: str) -> float:
    if unicodedata.normalize("NFC", premise).strip() == unicodedata.normalize("NFC", hypothesis).strip():
        return NLI_IDENTITY_SCORE
    return stable_unit_hash("nli", premise, hypothesis)


def deterministic_corruption(text: str, num_corruptions: int) -> str:
    words = text.split()
    if not words:
        return text + " [corrupted]"
    k = min(num_corruptions, len(words))
    positions: list[int] = []
    for i in range(k):
        pos = int(stable_unit_hash("corrupt", text, str(i)) * len(words))
        while pos in positions:
            pos = (pos + 1) % len(words)
        positions.append(pos)
    for pos in positions:
        flipped = words[pos][::-1]
        words[pos] = flipped if flipped != words[pos] else words[pos] + "x"
    return " ".join(words)


def deterministic_summary(texts: list[str]) -> str:
    leads = []
    for t in texts:
        t = t.strip()
        if not t:
            continue
        cut = t.find(". ")
        leads.append(t[: cut + 1] if cut != -1 else t)
    return " ".join(leads)


def deterministic_queries(statement: str) -> str:
    return "\n".join(f"{statement} fact {i}" for i in (1, 2, 3))


def _last_prefixed_line(prompt: str, prefix: str) -> str:
    for line in reversed(prompt.splitlines()):
        if line.startswith(prefix):
            return line[len(prefix) :]
    raise UnknownPromptError(f"prompt lacks a {prefix!r} line")


def fixture_generate(prompt: str) -> str:
    """Answer a recognized template prompt exactly as the pipeline mock does."""
    if prompt.startswith(SUMMARIZE_PREFIX):
        _, _, rest = prompt.partition("\n\n")
        block, _, _ = rest.rpartition("\n\nSummary:")
        return deterministic_summary(block.splitlines())
    if prompt.startswith(CORRUPT_PREFIX):
        text = _last_prefixed_line(prompt, "Text: ")
        count_raw = _last_prefixed_line(prompt, "Number of things to change: ")
        k = int(count_raw.rstrip("."))
        corrupted = deterministic_corruption(text, k)
        return f"I will change {k} detail(s) to plausible but wrong values.\nCorruption: {corrupted}"
    if prompt.startswith(QUERY_PREFIX):
        return deterministic_queries(_last_prefixed_line(prompt, "Statement: "))
    raise UnknownPromptError("fixture mode does not recognize this prompt")


def extract_claim(segment: str) -> str:
    if not segment.startswith(SEGMENT_CLAIM_PREFIX) or SEGMENT_EVIDENCE_SEPARATOR not in segment:
        raise UnknownPromptError("segment does not follow the claim/evidence layout")
    return segment[len(SEGMENT_CLAIM_PREFIX) : segment.index(SEGMENT_EVIDENCE_SEPARATOR)]


def render_segment(claim_text: str, evidence_text: str, word_cap: int = SEGMENT_WORD_CAP) -> str:
    """The fused training/inference segment layout (kept in lockstep with
    the pipeline's editor input packer)."""
    prefix = f"{SEGMENT_CLAIM_PREFIX}{claim_text}{SEGMENT_EVIDENCE_SEPARATOR}"
    evidence_words = evidence_text.split()
    allowed = word_cap - len(prefix.split())
    if allowed < len(evidence_words):
        evidence_words = evidence_words[: max(allowed, 0)]
    return (prefix + " ".join(evidence_words)).rstrip()
