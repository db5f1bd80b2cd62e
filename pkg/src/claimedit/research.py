"""Evidence gathering: query generation, page chunking, per-query search.

The research stage turns one claim into search queries, retrieves and
chunks pages per query, keeps the best-scoring chunk per query, and
scores every (query, evidence) pair into a relevance matrix for report
selection. Per-query searches fan out over a bounded thread pool; all
results are assembled by index so scheduling cannot change the output.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .clients import ClientBundle, GenerationClient, ScoringClient, SearchClient
from .core import Claim, EvidenceSnippet, Query, content_id
from .errors import NoQueriesError, SearchEmptyError
from .metrics import split_sentences
from .prompts import render_query_generation
from .report import RelevanceMatrix, dedupe_evidence

logger = logging.getLogger(__name__)

DEFAULT_QUERY_CAP = 5
DEFAULT_TOP_PAGES = 5
DEFAULT_WINDOW_WORDS = 128
DEFAULT_STRIDE_WORDS = 64
SNAP_DISTANCE_WORDS = 20


@dataclass(frozen=True)
class QueryStatus:
    query_id: str
    ok: bool
    error: str | None = None


@dataclass(frozen=True)
class ResearchResult:
    """Everything the research stage learned about one claim."""

    claim_id: str
    queries: tuple[Query, ...]
    evidence: tuple[EvidenceSnippet, ...]
    matrix: RelevanceMatrix
    statuses: tuple[QueryStatus, ...]


def generate_queries(claim: Claim, gen: GenerationClient, cap: int = DEFAULT_QUERY_CAP) -> list[Query]:
    """One search query per non-empty output line, capped at ``cap``."""
    if not claim.text.strip():
        raise NoQueriesError("claim text is empty")
    prompt = render_query_generation(claim.text, claim.context)
    output = gen.generate(prompt, max_tokens=128, temperature=0.0)
    lines = [line.strip() for line in output.splitlines()]
    texts = [line for line in lines if line][:cap]
    if not texts:
        raise NoQueriesError(f"no parseable queries for claim {claim.id!r}")
    return [Query(id=f"{claim.id}:q{i}", text=t) for i, t in enumerate(texts)]


def _sentence_start_words(words: list[str], text: str) -> list[int]:
    """Word indices at which sentences start in the normalized text."""
    try:
        split = split_sentences(text)
    except Exception:
        return [0]
    starts = [0]
    consumed = 0
    word_index = 0
    for sentence in split.sentences[:-1]:
        consumed += len(sentence.split())
        word_index = consumed
        if word_index < len(words):
            starts.append(word_index)
    return starts


def chunk_passages(
    page_text: str,
    window: int = DEFAULT_WINDOW_WORDS,
    stride: int = DEFAULT_STRIDE_WORDS,
    url: str | None = None,
    title: str | None = None,
) -> list[EvidenceSnippet]:
    """Sliding word-window chunks, snapped outward to sentence boundaries.

    Windows start every ``stride`` words and span ``window`` words. When a
    sentence boundary lies within 20 words outside an edge, the edge moves
    out to it. Chunking stops once a window reaches the end of the page.
    """
    if not (window >= stride >= 1):
        raise ValueError("window >= stride >= 1 required")
    normalized = " ".join(page_text.split())
    if not normalized:
        return []
    words = normalized.split(" ")
    n = len(words)
    boundaries = sorted(set(_sentence_start_words(words, normalized)) | {n})

    chunks: list[EvidenceSnippet] = []
    start = 0
    index = 0
    prev_end = -1
    while start == 0 or (start < n and prev_end < n):
        end = min(start + window, n)
        snap_start = max((b for b in boundaries if start - SNAP_DISTANCE_WORDS <= b <= start), default=start)
        snap_end = min((b for b in boundaries if end <= b <= end + SNAP_DISTANCE_WORDS), default=end)
        text = " ".join(words[snap_start:snap_end])
        chunks.append(
            EvidenceSnippet(
                id=content_id(f"{url or ''}#{index}#{text}"),
                text=text,
                url=url,
                title=title,
                chunk_index=index,
            )
        )
        prev_end = end
        index += 1
        start += stride
    return chunks


def search_evidence(
    query: Query,
    search: SearchClient,
    scorer: ScoringClient,
    top_pages: int = DEFAULT_TOP_PAGES,
    window: int = DEFAULT_WINDOW_WORDS,
    stride: int = DEFAULT_STRIDE_WORDS,
) -> tuple[EvidenceSnippet, list[tuple[EvidenceSnippet, float]]]:
    """Best-scoring chunk for a query, plus every scored chunk.

    Ties break toward the lowest (page rank, chunk index). Raises
    SearchEmptyError when no page yields any chunk.
    """
    pages = search.search(query.text, top_pages)
    ranked_chunks: list[tuple[int, EvidenceSnippet]] = []
    for rank, page in enumerate(pages):
        for chunk in chunk_passages(page.text, window=window, stride=stride, url=page.url, title=page.title):
            ranked_chunks.append((rank, chunk))
    if not ranked_chunks:
        raise SearchEmptyError(query.id)
    scores = scorer.score_pairs([(query.text, c.text) for _, c in ranked_chunks])
    best_pos = 0
    for pos in range(1, len(ranked_chunks)):
        if scores[pos] > scores[best_pos]:
            best_pos = pos
    # equal scores keep the earlier (page rank, chunk_index) entry, which is
    # the list order by construction
    best_rank, best_chunk = ranked_chunks[best_pos]
    best = EvidenceSnippet(
        id=best_chunk.id,
        text=best_chunk.text,
        url=best_chunk.url,
        title=best_chunk.title,
        chunk_index=best_chunk.chunk_index,
        relevance={query.id: scores[best_pos]},
    )
    return best, [(chunk, scores[pos]) for pos, (_, chunk) in enumerate(ranked_chunks)]


def run_research(
    claim: Claim,
    clients: ClientBundle,
    query_cap: int = DEFAULT_QUERY_CAP,
    top_pages: int = DEFAULT_TOP_PAGES,
    window: int = DEFAULT_WINDOW_WORDS,
    stride: int = DEFAULT_STRIDE_WORDS,
    parallelism: int = 4,
) -> ResearchResult:
    """Full research stage for one claim.

    Queries run concurrently; failures are recorded per query and the
    pipeline proceeds while at least one query succeeded. The relevance
    matrix scores every (query, evidence) pair of the deduped evidence.
    """
    queries = generate_queries(claim, clients.generation, cap=query_cap)

    def one(query: Query):
        return search_evidence(query, clients.search, clients.scorer, top_pages=top_pages, window=window, stride=stride)

    bests: list[EvidenceSnippet | None] = [None] * len(queries)
    statuses: list[QueryStatus] = []
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        outcomes = list(pool.map(lambda q: _guard(one, q), queries))
    for i, (query, outcome) in enumerate(zip(queries, outcomes)):
        if isinstance(outcome, Exception):
            logger.warning("query %s failed: %s", query.id, outcome)
            statuses.append(QueryStatus(query_id=query.id, ok=False, error=str(outcome)))
        else:
            bests[i] = outcome[0]
            statuses.append(QueryStatus(query_id=query.id, ok=True))

    found = [b for b in bests if b is not None]
    if not found:
        raise SearchEmptyError(f"{claim.id} (all {len(queries)} queries failed)")
    evidence = dedupe_evidence(found)

    pairs = [(q.text, e.text) for q in queries for e in evidence]
    flat = clients.scorer.score_pairs(pairs)
    scores = np.asarray(flat, dtype=np.float64).reshape(len(queries), len(evidence))
    matrix = RelevanceMatrix(queries=tuple(queries), evidence=tuple(evidence), scores=scores)
    return ResearchResult(
        claim_id=claim.id,
        queries=tuple(queries),
        evidence=tuple(evidence),
        matrix=matrix,
        statuses=tuple(statuses),
    )


def _guard(fn, arg):
    try:
        return fn(arg)
    except Exception as exc:
        return exc
