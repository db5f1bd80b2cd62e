"""Editor input packing and statement revision.

The editor consumes one segment per evidence slot, each repeating the
full claim next to one snippet, so it can weigh every snippet against
the statement independently. The segment layout here is the single
source of truth: training-data exporters must render the identical
template or trained editors will see a distribution they never learned.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .clients import FusedGenerationClient
from .core import AttributionReport, Claim
from .errors import EmptyEvidenceError

logger = logging.getLogger(__name__)

SEGMENT_CLAIM_PREFIX = "claim: "
SEGMENT_EVIDENCE_SEPARATOR = " evidence: "
DEFAULT_SLOTS = 4
DEFAULT_SEGMENT_WORD_CAP = 512
ABSTAIN_TOKEN = "No edit."


@dataclass(frozen=True)
class EditorInput:
    """Fixed-width segment layout fed to the fused editor."""

    segments: tuple[str, ...]
    claim: str


def render_segment(claim_text: str, evidence_text: str, word_cap: int = DEFAULT_SEGMENT_WORD_CAP) -> str:
    """One editor segment; over-long evidence is truncated from its tail."""
    prefix = f"{SEGMENT_CLAIM_PREFIX}{claim_text}{SEGMENT_EVIDENCE_SEPARATOR}"
    evidence_words = evidence_text.split()
    allowed = word_cap - len(prefix.split())
    if allowed < len(evidence_words):
        evidence_words = evidence_words[: max(allowed, 0)]
    # fully truncated evidence leaves no dangling separator space
    return (prefix + " ".join(evidence_words)).rstrip()


def pack_editor_input(
    claim: Claim,
    report: AttributionReport,
    slots: int = DEFAULT_SLOTS,
    word_cap: int = DEFAULT_SEGMENT_WORD_CAP,
) -> EditorInput:
    """Top ``slots`` report snippets as segments, repeating the last to fill."""
    if report is None or not report.evidence:
        raise EmptyEvidenceError("cannot pack editor input from an empty report")
    if slots < 1:
        raise ValueError("slots must be >= 1")
    snippets = list(report.evidence[:slots])
    while len(snippets) < slots:
        snippets.append(snippets[-1])
    segments = tuple(render_segment(claim.text, s.text, word_cap=word_cap) for s in snippets)
    return EditorInput(segments=segments, claim=claim.text)


def edit_statement(
    claim: Claim,
    report: AttributionReport,
    editor: FusedGenerationClient,
    slots: int = DEFAULT_SLOTS,
    word_cap: int = DEFAULT_SEGMENT_WORD_CAP,
    max_tokens: int = 256,
) -> Claim:
    """Revise ``claim`` against the report's evidence.

    An empty generation or the abstention token leaves the claim
    unchanged; revision never alters claim identity or provenance.
    """
    packed = pack_editor_input(claim, report, slots=slots, word_cap=word_cap)
    output = editor.generate_fused(list(packed.segments), max_tokens=max_tokens).strip()
    if not output or output == ABSTAIN_TOKEN:
        logger.debug("editor abstained on claim %s", claim.id)
        revised_text = claim.text
    else:
        revised_text = output
    return Claim(id=claim.id, text=revised_text, context=claim.context, dataset_tag=claim.dataset_tag)
