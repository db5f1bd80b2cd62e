"""Domain types and JSONL serialization shared by every pipeline stage.

All value types are frozen dataclasses: text fields are normalized to
Unicode NFC at construction so downstream edit-distance and dedup logic
is encoding-stable, and instances can be shared freely across threads.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import math
import unicodedata
from dataclasses import dataclass, fields
from typing import Any, Iterable, Type, TypeVar

from .errors import DeserializationError, SerializationError

logger = logging.getLogger(__name__)

MAX_REPORT_EVIDENCE = 5
PACKED_EVIDENCE_SLOTS = 4

# Lines carrying this key mark a run interrupted mid-write; readers skip them.
TRUNCATION_KEY = "__truncated__"


def nfc(text: str) -> str:
    """Normalize to Unicode NFC."""
    return unicodedata.normalize("NFC", text)


def normalized_text_key(text: str) -> str:
    """Dedup key: NFC, casefolded, whitespace collapsed to single spaces."""
    return " ".join(nfc(text).casefold().split())


def content_id(text: str) -> str:
    """Deterministic id: first 16 hex chars of SHA-256 of the NFC text."""
    return hashlib.sha256(nfc(text).encode("utf-8")).hexdigest()[:16]


class EditCategory(str, enum.Enum):
    HUGE = "Huge"
    BAD = "Bad"
    UNNECESSARY = "Unnecessary"
    GOOD = "Good"
    OTHER = "Other"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class Claim:
    """A statement to be attributed and possibly revised.

    ``context`` carries surrounding discourse (e.g. the preceding dialog
    turn) when the statement alone is under-specified.
    """

    id: str
    text: str
    context: str | None = None
    dataset_tag: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "text", nfc(self.text))
        if self.context is not None:
            object.__setattr__(self, "context", nfc(self.context))
        _require(bool(self.text.strip()), "Claim.text must be non-empty")


@dataclass(frozen=True)
class Query:
    """A web-search query derived from a claim."""

    id: str
    text: str

    def __post_init__(self):
        object.__setattr__(self, "text", nfc(self.text))
        _require(bool(self.text.strip()), "Query.text must be non-empty")


@dataclass(frozen=True)
class EvidenceSnippet:
    """A passage with provenance and optional per-query relevance scores."""

    id: str
    text: str
    url: str | None = None
    title: str | None = None
    chunk_index: int = 0
    relevance: dict[str, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "text", nfc(self.text))
        _require(bool(self.text.strip()), "EvidenceSnippet.text must be non-empty")
        _require(self.chunk_index >= 0, "chunk_index must be nonnegative")
        if self.relevance is not None:
            for qid, score in self.relevance.items():
                _require(
                    math.isfinite(score),
                    f"relevance score for query {qid!r} must be finite",
                )


@dataclass(frozen=True)
class AttributionReport:
    """The evidence subset selected to ground one claim.

    Holds between 1 and 5 snippets with pairwise-distinct normalized text;
    ``coverage`` is the summed best-per-query relevance of the subset.
    """

    evidence: tuple[EvidenceSnippet, ...]
    coverage: float

    def __post_init__(self):
        object.__setattr__(self, "evidence", tuple(self.evidence))
        n = len(self.evidence)
        _require(
            1 <= n <= MAX_REPORT_EVIDENCE,
            f"report must hold 1..{MAX_REPORT_EVIDENCE} snippets, got {n}",
        )
        keys = [normalized_text_key(e.text) for e in self.evidence]
        _require(len(set(keys)) == n, "report snippets must have distinct normalized text")
        _require(math.isfinite(self.coverage), "coverage must be finite")


@dataclass(frozen=True)
class EditRecord:
    """One claim's trip through the pipeline, with scores and edit categories."""

    original: Claim
    revised: Claim
    report: AttributionReport
    attr_before: float
    attr_after: float
    preservation: float
    f1_ap: float
    category: frozenset[EditCategory]

    def __post_init__(self):
        object.__setattr__(self, "category", frozenset(self.category))
        for name in ("attr_before", "attr_after", "preservation", "f1_ap"):
            value = getattr(self, name)
            _require(0.0 <= value <= 1.0, f"{name} must be in [0, 1], got {value}")
        cats = self.category
        if EditCategory.UNNECESSARY in cats:
            _require(EditCategory.BAD in cats, "Unnecessary requires Bad")
        _require(
            not (EditCategory.GOOD in cats and EditCategory.BAD in cats),
            "Good and Bad cannot co-occur",
        )


@dataclass(frozen=True)
class TrainingInstance:
    """A corruption-denoising training example with packed evidence context."""

    id: str
    seed_query: Query
    clean: str
    corrupted: str
    gold: tuple[EvidenceSnippet, ...]
    negatives: tuple[EvidenceSnippet, ...]
    packed: tuple[EvidenceSnippet, ...]
    corruption_reasoning: str
    num_corruptions: int

    def __post_init__(self):
        object.__setattr__(self, "clean", nfc(self.clean))
        object.__setattr__(self, "corrupted", nfc(self.corrupted))
        object.__setattr__(self, "gold", tuple(self.gold))
        object.__setattr__(self, "negatives", tuple(self.negatives))
        object.__setattr__(self, "packed", tuple(self.packed))
        _require(len(self.gold) <= PACKED_EVIDENCE_SLOTS, "at most 4 gold snippets")
        _require(
            len(self.packed) == PACKED_EVIDENCE_SLOTS,
            f"packed must hold exactly {PACKED_EVIDENCE_SLOTS} snippets",
        )
        packed_ids = {e.id for e in self.packed}
        for g in self.gold:
            _require(g.id in packed_ids, f"gold snippet {g.id!r} missing from packed")
        _require(self.num_corruptions >= 1, "num_corruptions must be >= 1")


# --- JSONL serialization -------------------------------------------------
#
# Dicts are built in dataclass field order and None-valued optionals are
# omitted, so key order is stable and files round-trip byte-for-byte.

R = TypeVar("R", bound="Claim | Query | EvidenceSnippet | AttributionReport | EditRecord | TrainingInstance")


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, (Claim, Query, EvidenceSnippet, AttributionReport, EditRecord, TrainingInstance)):
        return record_to_dict(value)
    if isinstance(value, frozenset):
        return sorted(v.value if isinstance(v, EditCategory) else v for v in value)
    if isinstance(value, tuple):
        return [_to_jsonable(v) for v in value]
    return value


def record_to_dict(record: Any) -> dict[str, Any]:
    """Render a record as a plain dict in declared field order, skipping Nones."""
    out: dict[str, Any] = {}
    for f in fields(record):
        value = getattr(record, f.name)
        if value is None:
            continue
        out[f.name] = _to_jsonable(value)
    return out


def serialize_dataset(records: Iterable[Any]) -> bytes:
    """Serialize a homogeneous record list to UTF-8 JSONL.

    Raises SerializationError naming the record id when a field cannot be
    represented in JSON (non-finite floats included).
    """
    records = list(records)
    if records:
        first_type = type(records[0])
        for r in records:
            if type(r) is not first_type:
                raise SerializationError(
                    getattr(r, "id", "<no id>"),
                    f"mixed record types: {first_type.__name__} vs {type(r).__name__}",
                )
    lines = []
    for r in records:
        try:
            lines.append(json.dumps(record_to_dict(r), ensure_ascii=False, allow_nan=False))
        except (TypeError, ValueError) as exc:
            raise SerializationError(getattr(r, "id", "<no id>"), str(exc)) from exc
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


def _pop_required(data: dict, key: str, line_number: int) -> Any:
    if key not in data:
        raise DeserializationError(line_number, f"missing required field {key!r}")
    return data.pop(key)


class _UnknownKeyCounter:
    def __init__(self):
        self.count = 0

    def absorb(self, leftover: dict) -> None:
        self.count += len(leftover)


def _claim_from_dict(d: dict, ln: int, counter: _UnknownKeyCounter) -> Claim:
    c = Claim(
        id=str(_pop_required(d, "id", ln)),
        text=str(_pop_required(d, "text", ln)),
        context=d.pop("context", None),
        dataset_tag=d.pop("dataset_tag", None),
    )
    counter.absorb(d)
    return c


def _query_from_dict(d: dict, ln: int, counter: _UnknownKeyCounter) -> Query:
    q = Query(id=str(_pop_required(d, "id", ln)), text=str(_pop_required(d, "text", ln)))
    counter.absorb(d)
    return q


def _snippet_from_dict(d: dict, ln: int, counter: _UnknownKeyCounter) -> EvidenceSnippet:
    s = EvidenceSnippet(
        id=str(_pop_required(d, "id", ln)),
        text=str(_pop_required(d, "text", ln)),
        url=d.pop("url", None),
        title=d.pop("title", None),
        chunk_index=int(d.pop("chunk_index", 0)),
        relevance=d.pop("relevance", None),
    )
    counter.absorb(d)
    return s


def _report_from_dict(d: dict, ln: int, counter: _UnknownKeyCounter) -> AttributionReport:
    evidence = [_snippet_from_dict(dict(e), ln, counter) for e in _pop_required(d, "evidence", ln)]
    r = AttributionReport(evidence=tuple(evidence), coverage=float(_pop_required(d, "coverage", ln)))
    counter.absorb(d)
    return r


def _edit_record_from_dict(d: dict, ln: int, counter: _UnknownKeyCounter) -> EditRecord:
    rec = EditRecord(
        original=_claim_from_dict(dict(_pop_required(d, "original", ln)), ln, counter),
        revised=_claim_from_dict(dict(_pop_required(d, "revised", ln)), ln, counter),
        report=_report_from_dict(dict(_pop_required(d, "report", ln)), ln, counter),
        attr_before=float(_pop_required(d, "attr_before", ln)),
        attr_after=float(_pop_required(d, "attr_after", ln)),
        preservation=float(_pop_required(d, "preservation", ln)),
        f1_ap=float(_pop_required(d, "f1_ap", ln)),
        category=frozenset(EditCategory(c) for c in _pop_required(d, "category", ln)),
    )
    counter.absorb(d)
    return rec


def _instance_from_dict(d: dict, ln: int, counter: _UnknownKeyCounter) -> TrainingInstance:
    inst = TrainingInstance(
        id=str(_pop_required(d, "id", ln)),
        seed_query=_query_from_dict(dict(_pop_required(d, "seed_query", ln)), ln, counter),
        clean=str(_pop_required(d, "clean", ln)),
        corrupted=str(_pop_required(d, "corrupted", ln)),
        gold=tuple(_snippet_from_dict(dict(e), ln, counter) for e in _pop_required(d, "gold", ln)),
        negatives=tuple(_snippet_from_dict(dict(e), ln, counter) for e in _pop_required(d, "negatives", ln)),
        packed=tuple(_snippet_from_dict(dict(e), ln, counter) for e in _pop_required(d, "packed", ln)),
        corruption_reasoning=str(_pop_required(d, "corruption_reasoning", ln)),
        num_corruptions=int(_pop_required(d, "num_corruptions", ln)),
    )
    counter.absorb(d)
    return inst


_PARSERS = {
    Claim: _claim_from_dict,
    Query: _query_from_dict,
    EvidenceSnippet: _snippet_from_dict,
    AttributionReport: _report_from_dict,
    EditRecord: _edit_record_from_dict,
    TrainingInstance: _instance_from_dict,
}


def deserialize_dataset(data: bytes | str, expected_type: Type[R]) -> list[R]:
    """Parse UTF-8 JSONL into records of ``expected_type``, in file order.

    Unknown keys are ignored (total logged as a warning). Malformed lines
    raise DeserializationError with their 1-based line number; missing
    required fields raise naming the field. Claim files additionally
    enforce id uniqueness.
    """
    if expected_type not in _PARSERS:
        raise TypeError(f"unsupported record type {expected_type!r}")
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    parser = _PARSERS[expected_type]
    counter = _UnknownKeyCounter()
    records: list[R] = []
    seen_ids: set[str] = set()
    truncated = False
    # split on '\n' only: json.dumps escapes newlines, but other Unicode
    # line separators (NEL, LS, PS) may appear raw inside string values
    for ln, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DeserializationError(ln, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise DeserializationError(ln, "expected a JSON object")
        if obj.get(TRUNCATION_KEY):
            truncated = True
            continue
        try:
            record = parser(obj, ln, counter)
        except DeserializationError:
            raise
        except (ValueError, TypeError) as exc:
            raise DeserializationError(ln, str(exc)) from exc
        if expected_type is Claim:
            if record.id in seen_ids:
                raise DeserializationError(ln, f"duplicate claim id {record.id!r}")
            seen_ids.add(record.id)
        records.append(record)
    if counter.count:
        logger.warning("ignored %d unknown key(s) while reading %s records", counter.count, expected_type.__name__)
    if truncated:
        logger.warning("input carries a truncation marker; the producing run was interrupted")
    return records
