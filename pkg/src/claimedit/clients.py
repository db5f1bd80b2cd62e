"""Service contracts for generation, fused generation, scoring, NLI, and search.

Every contract has two implementations: an HTTP client speaking the
minimal JSON wire format, and a deterministic offline mock. The whole
test suite runs on mocks alone; the HTTP clients add retry with
exponential backoff on transient failures and a per-client admission
limiter so concurrent callers never exceed ``parallelism_limit``
in-flight requests.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import requests

from .core import nfc
from .errors import PermanentFailure, TransientFailure
from .prompts import CORRUPT_PREFIX, QUERY_PREFIX, SUMMARIZE_PREFIX

logger = logging.getLogger(__name__)

GENERATE_PATH = "/generate"
GENERATE_FUSED_PATH = "/generate_fused"
SCORE_PATH = "/score"
NLI_PATH = "/nli"
SEARCH_PATH = "/search"

NLI_IDENTITY_SCORE = 0.95


@dataclass(frozen=True)
class ClientConfig:
    base_url: str = ""
    api_key: str | None = None
    timeout: float = 30.0
    max_retries: int = 2
    backoff_base: float = 0.25
    parallelism_limit: int = 4

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.parallelism_limit < 1:
            raise ValueError("parallelism_limit must be >= 1")


@dataclass(frozen=True)
class SearchResult:
    url: str
    title: str
    text: str


class GenerationClient(Protocol):
    def generate(self, prompt: str, max_tokens: int = 256, temperature: float = 0.0) -> str: ...


class FusedGenerationClient(Protocol):
    def generate_fused(self, segments: Sequence[str], max_tokens: int = 256) -> str: ...


class ScoringClient(Protocol):
    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[float]: ...


class NLIClient(Protocol):
    def nli(self, pairs: Sequence[tuple[str, str]]) -> list[float]: ...


class SearchClient(Protocol):
    def search(self, query: str, top_k: int) -> list[SearchResult]: ...


@dataclass
class ClientBundle:
    """The five service clients a pipeline run needs."""

    generation: GenerationClient
    fused: FusedGenerationClient
    scorer: ScoringClient
    nli: NLIClient
    search: SearchClient


# --- retry policy -----------------------------------------------------------


class RetryPolicy:
    """Re-run a callable on TransientFailure with exponential backoff.

    Performs at most ``max_retries`` re-attempts with delays
    backoff_base * 2**i. PermanentFailure propagates immediately.
    """

    def __init__(self, max_retries: int, backoff_base: float, sleeper: Callable[[float], None] = time.sleep):
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._sleeper = sleeper
        self.total_retries = 0

    def run(self, fn: Callable[[], object]):
        attempt = 0
        while True:
            try:
                return fn()
            except TransientFailure as exc:
                if attempt >= self.max_retries:
                    raise
                delay = self.backoff_base * (2**attempt)
                logger.warning("transient failure (%s); retry %d/%d after %.3fs", exc, attempt + 1, self.max_retries, delay)
                self._sleeper(delay)
                self.total_retries += 1
                attempt += 1


# --- HTTP clients ------------------------------------------------------------


def _requests_transport(url: str, payload: dict, headers: dict, timeout: float) -> tuple[int, object]:
    try:
        resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
    except (requests.Timeout, requests.ConnectionError) as exc:
        raise TransientFailure(f"POST {url}: {exc}") from exc
    try:
        body = resp.json()
    except ValueError:
        body = resp.text
    return resp.status_code, body


class HttpServiceClient:
    """Shared POST/JSON plumbing: auth header, retries, admission limiting."""

    def __init__(self, config: ClientConfig, transport=None, sleeper=time.sleep):
        if not config.base_url:
            raise ValueError("HTTP client requires a base_url")
        self.config = config
        self._transport = transport or _requests_transport
        self._limiter = threading.BoundedSemaphore(config.parallelism_limit)
        self._retry = RetryPolicy(config.max_retries, config.backoff_base, sleeper)

    @property
    def retries_performed(self) -> int:
        return self._retry.total_retries

    def _post(self, path: str, payload: dict) -> dict:
        url = self.config.base_url.rstrip("/") + path
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"

        def attempt() -> dict:
            with self._limiter:
                status, body = self._transport(url, payload, headers, self.config.timeout)
            if status >= 500:
                raise TransientFailure(f"POST {path} -> {status}")
            if status >= 400:
                raise PermanentFailure(f"POST {path} -> {status}: {body}")
            if not isinstance(body, dict):
                raise PermanentFailure(f"POST {path}: non-JSON response")
            return body

        return self._retry.run(attempt)


class HttpGenerationClient(HttpServiceClient):
    def generate(self, prompt: str, max_tokens: int = 256, temperature: float = 0.0) -> str:
        if not prompt:
            raise PermanentFailure("prompt must be non-empty")
        body = self._post(GENERATE_PATH, {"prompt": prompt, "max_tokens": max_tokens, "temperature": temperature})
        return str(body.get("text", ""))


class HttpFusedClient(HttpServiceClient):
    def generate_fused(self, segments: Sequence[str], max_tokens: int = 256) -> str:
        if not segments:
            raise PermanentFailure("segments must be non-empty")
        body = self._post(GENERATE_FUSED_PATH, {"segments": list(segments), "max_tokens": max_tokens})
        return str(body.get("text", ""))


class HttpScoringClient(HttpServiceClient):
    path = SCORE_PATH

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        if not pairs:
            raise PermanentFailure("pairs must be non-empty")
        body = self._post(self.path, {"pairs": [[a, b] for a, b in pairs]})
        scores = body.get("scores")
        if not isinstance(scores, list) or len(scores) != len(pairs):
            raise PermanentFailure(f"server returned {0 if scores is None else len(scores)} scores for {len(pairs)} pairs")
        return [float(s) for s in scores]


class HttpNLIClient(HttpScoringClient):
    path = NLI_PATH

    def nli(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        return [min(max(s, 0.0), 1.0) for s in self.score_pairs(pairs)]


class HttpSearchClient(HttpServiceClient):
    def search(self, query: str, top_k: int) -> list[SearchResult]:
        if top_k < 1:
            raise PermanentFailure("top_k must be >= 1")
        body = self._post(SEARCH_PATH, {"query": query, "top_k": top_k})
        results = body.get("results", [])
        return [
            SearchResult(url=str(r.get("url", "")), title=str(r.get("title", "")), text=str(r.get("text", "")))
            for r in results
        ]


# --- deterministic offline mocks ---------------------------------------------
#
# The hash-derived scores and the fixture generation rules below define the
# reference behavior that any fixture-mode server must reproduce byte for
# byte, so changes here are breaking.


def stable_unit_hash(*parts: str) -> float:
    """Deterministic value in [0, 1) from the BLAKE2b hash of the parts."""
    digest = hashlib.blake2b("\x1f".join(parts).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2.0**64


def deterministic_corruption(text: str, num_corruptions: int) -> str:
    """Reverse ``num_corruptions`` hash-chosen words of ``text``.

    Palindromic tokens get an 'x' suffix instead, so the output always
    differs from the input at every touched position.
    """
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
    """First sentence of each text, joined in order."""
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


class MockGenerationClient:
    """Canned prompt->completion mapping; strict mode rejects unmapped prompts."""

    def __init__(self, responses: dict[str, str] | None = None, default: str | None = None, strict: bool = True):
        self.responses = dict(responses or {})
        self.default = default
        self.strict = strict
        self.calls: list[str] = []

    def generate(self, prompt: str, max_tokens: int = 256, temperature: float = 0.0) -> str:
        if not prompt:
            raise PermanentFailure("prompt must be non-empty")
        self.calls.append(prompt)
        if prompt in self.responses:
            return self.responses[prompt]
        if self.default is not None:
            return self.default
        if self.strict:
            raise PermanentFailure("mock has no response for this prompt")
        return ""


class FixtureGenerationClient:
    """Template-aware deterministic generator for offline pipeline runs.

    Recognizes the query-generation, summarization, and corruption
    templates by prefix and answers each with a pure function of the
    prompt, so reruns are byte-identical.
    """

    def generate(self, prompt: str, max_tokens: int = 256, temperature: float = 0.0) -> str:
        if not prompt:
            raise PermanentFailure("prompt must be non-empty")
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
        raise PermanentFailure("fixture generator does not recognize this prompt")


def _last_prefixed_line(prompt: str, prefix: str) -> str:
    for line in reversed(prompt.splitlines()):
        if line.startswith(prefix):
            return line[len(prefix) :]
    raise PermanentFailure(f"prompt lacks a {prefix!r} line")


class MockFusedClient:
    """Fused-generation mock: canned replies keyed by claim substring.

    The claim is recovered from the first segment's layout. Unmatched
    claims are echoed back, which downstream treats as abstention.
    """

    def __init__(self, edits: Sequence[tuple[str, str]] = ()):
        self.edits = list(edits)
        self.calls: list[list[str]] = []

    def generate_fused(self, segments: Sequence[str], max_tokens: int = 256) -> str:
        if not segments:
            raise PermanentFailure("segments must be non-empty")
        self.calls.append(list(segments))
        claim = extract_claim_from_segment(segments[0])
        for substring, revision in self.edits:
            if substring in claim:
                return revision
        return claim


def extract_claim_from_segment(segment: str) -> str:
    """Recover the claim text from a packed editor segment."""
    head = "claim: "
    sep = " evidence: "
    if not segment.startswith(head) or sep not in segment:
        raise PermanentFailure("segment does not follow the claim/evidence layout")
    return segment[len(head) : segment.index(sep)]


class HashScoringClient:
    """Relevance scores as a stable hash of (query, passage), in [0, 1).

    ``overrides`` is a list of (query_substring, passage_substring, score)
    rules checked in order before hashing.
    """

    domain = "score"

    def __init__(self, overrides: Sequence[tuple[str, str, float]] = ()):
        self.overrides = list(overrides)

    def _score_one(self, query: str, passage: str) -> float:
        for q_sub, p_sub, score in self.overrides:
            if q_sub in query and p_sub in passage:
                return score
        return stable_unit_hash(self.domain, query, passage)

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        if not pairs:
            raise PermanentFailure("pairs must be non-empty")
        return [self._score_one(q, p) for q, p in pairs]


class HashNLIClient(HashScoringClient):
    """Entailment mock: identical (premise, hypothesis) pairs score 0.95."""

    domain = "nli"

    def _score_one(self, premise: str, hypothesis: str) -> float:
        for p_sub, h_sub, score in self.overrides:
            if p_sub in premise and h_sub in hypothesis:
                return min(max(score, 0.0), 1.0)
        if nfc(premise).strip() == nfc(hypothesis).strip():
            return NLI_IDENTITY_SCORE
        return stable_unit_hash(self.domain, premise, hypothesis)

    def nli(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        return self.score_pairs(pairs)


@dataclass(frozen=True)
class FixtureSet:
    """Parsed fixture file: search pages plus optional editor injections."""

    search_records: tuple[dict, ...] = ()
    edit_records: tuple[tuple[str, str], ...] = ()

    @classmethod
    def from_path(cls, path: str | Path) -> "FixtureSet":
        search_records: list[dict] = []
        edit_records: list[tuple[str, str]] = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            if "query_substring" in obj:
                search_records.append(obj)
            elif "claim_substring" in obj:
                edit_records.append((obj["claim_substring"], obj["revision"]))
            else:
                raise ValueError(f"unrecognized fixture line: {line[:80]}")
        return cls(search_records=tuple(search_records), edit_records=tuple(edit_records))


class FixtureSearchClient:
    """Serves canned pages for queries matching a fixture's query_substring."""

    def __init__(self, records: Sequence[dict]):
        self.records = list(records)

    def search(self, query: str, top_k: int) -> list[SearchResult]:
        if top_k < 1:
            raise PermanentFailure("top_k must be >= 1")
        for record in self.records:
            if record["query_substring"] in query:
                return [
                    SearchResult(url=p.get("url", ""), title=p.get("title", ""), text=p.get("text", ""))
                    for p in record["pages"][:top_k]
                ]
        return []


class FixtureFusedClient(MockFusedClient):
    """MockFusedClient wired from a fixture file's edit records."""


def make_fixture_clients(fixtures: FixtureSet | str | Path) -> ClientBundle:
    """Fully offline, deterministic client bundle for tests and --fixtures runs."""
    if not isinstance(fixtures, FixtureSet):
        fixtures = FixtureSet.from_path(fixtures)
    return ClientBundle(
        generation=FixtureGenerationClient(),
        fused=FixtureFusedClient(fixtures.edit_records),
        scorer=HashScoringClient(),
        nli=HashNLIClient(),
        search=FixtureSearchClient(fixtures.search_records),
    )


def make_http_clients(configs: dict[str, ClientConfig]) -> ClientBundle:
    """HTTP client bundle; ``configs`` keys: generation, fused, scorer, nli, search."""
    return ClientBundle(
        generation=HttpGenerationClient(configs["generation"]),
        fused=HttpFusedClient(configs["fused"]),
        scorer=HttpScoringClient(configs["scorer"]),
        nli=HttpNLIClient(configs["nli"]),
        search=HttpSearchClient(configs["search"]),
    )
