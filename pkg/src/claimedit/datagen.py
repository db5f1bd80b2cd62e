"""Unsupervised editor-training data: search, bin, summarize, corrupt, pack.

Each seed query becomes one training instance: high-scoring passages are
binned as gold evidence (at most four), a clean statement is summarized
from the gold set, an LLM corrupts it with a stated reasoning, and the
corrupted statement is packed with exactly four evidence snippets (gold
plus sampled hard negatives) for fused-input training.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

from .clients import ClientBundle, GenerationClient
from .core import EvidenceSnippet, Query, TrainingInstance, content_id
from .errors import (
    BadCorruptionFormatError,
    EmptySummaryError,
    NoGoldError,
    NoOpCorruptionError,
)
from .prompts import render_corrupt, render_summarize
from .research import (
    DEFAULT_STRIDE_WORDS,
    DEFAULT_TOP_PAGES,
    DEFAULT_WINDOW_WORDS,
    chunk_passages,
)

logger = logging.getLogger(__name__)

DEFAULT_GOLD_THRESHOLD = 0.5
GOLD_CAP = 4
PACK_SIZE = 4
CORRUPTION_MARKER = "Corruption:"
DEFAULT_PARSE_RETRIES = 2
VALIDATION_FRACTION = 0.10


@dataclass(frozen=True)
class EvidenceBins:
    """Gold (descending score) and negative passages for one seed query."""

    gold: tuple[EvidenceSnippet, ...]
    negatives: tuple[EvidenceSnippet, ...]
    threshold: float


@dataclass(frozen=True)
class CorruptionOutput:
    reasoning: str
    corrupted: str
    num_corruptions: int


@dataclass
class RunReport:
    """Accounting for a dataset-generation run."""

    produced: int = 0
    skipped: list[dict] = field(default_factory=list)
    flagged: list[str] = field(default_factory=list)
    token_counts: dict[str, int] = field(default_factory=lambda: {"prompt": 0, "completion": 0, "calls": 0})

    def to_dict(self) -> dict:
        return {
            "produced": self.produced,
            "skipped": self.skipped,
            "flagged": self.flagged,
            "token_counts": self.token_counts,
        }


class DatagenInterrupted(KeyboardInterrupt):
    """Carries whatever finished before an interrupt, for partial flushing."""

    def __init__(self, instances: list[TrainingInstance], report: RunReport):
        super().__init__("dataset generation interrupted")
        self.instances = instances
        self.report = report


def bin_evidence(
    scored: list[tuple[EvidenceSnippet, float]],
    threshold: float = DEFAULT_GOLD_THRESHOLD,
    gold_cap: int = GOLD_CAP,
) -> EvidenceBins:
    """Top-scoring passages at or above ``threshold`` become gold (capped);
    everything else is a hard negative. Ties break by snippet id."""
    ordered = sorted(scored, key=lambda pair: (-pair[1], pair[0].id))
    gold = [s for s, score in ordered if score >= threshold][:gold_cap]
    if not gold:
        raise NoGoldError(f"no passage scored >= {threshold}")
    gold_ids = {g.id for g in gold}
    negatives = [s for s, _ in ordered if s.id not in gold_ids]
    return EvidenceBins(gold=tuple(gold), negatives=tuple(negatives), threshold=threshold)


def summarize_gold(gold: list[EvidenceSnippet] | tuple[EvidenceSnippet, ...], gen: GenerationClient) -> str:
    """Clean statement: the generation client's summary of the gold texts."""
    if not 1 <= len(gold) <= GOLD_CAP:
        raise ValueError(f"gold must hold 1..{GOLD_CAP} snippets, got {len(gold)}")
    prompt = render_summarize([g.text for g in gold])
    summary = gen.generate(prompt, max_tokens=512, temperature=0.0).strip()
    if not summary:
        raise EmptySummaryError("summarizer returned empty output")
    return summary


def parse_corruption(generation: str, num_corruptions: int, clean: str) -> CorruptionOutput:
    """Split a corruption generation into reasoning and corrupted text."""
    marker_at = None
    lines = generation.splitlines()
    for i, line in enumerate(lines):
        if line.strip().startswith(CORRUPTION_MARKER):
            marker_at = i
            break
    if marker_at is None:
        raise BadCorruptionFormatError(f"no {CORRUPTION_MARKER!r} marker in generation")
    reasoning = "\n".join(lines[:marker_at]).strip()
    first = lines[marker_at].strip()[len(CORRUPTION_MARKER) :].strip()
    corrupted = "\n".join([first] + lines[marker_at + 1 :]).strip()
    if not corrupted:
        raise BadCorruptionFormatError("empty corrupted text after marker")
    if corrupted == clean.strip():
        raise NoOpCorruptionError("corruption returned the clean statement unchanged")
    return CorruptionOutput(reasoning=reasoning, corrupted=corrupted, num_corruptions=num_corruptions)


def corrupt_statement(
    clean: str,
    num_corruptions: int,
    gen: GenerationClient,
    parse_retries: int = DEFAULT_PARSE_RETRIES,
) -> CorruptionOutput:
    """Prompt for a reasoning-then-corruption rewrite of ``clean``.

    Malformed or no-op generations are retried up to ``parse_retries``
    times before the error propagates.
    """
    if num_corruptions < 1:
        raise ValueError("num_corruptions must be >= 1")
    prompt = render_corrupt(clean, num_corruptions)
    attempts = parse_retries + 1
    last_error: Exception | None = None
    for _ in range(attempts):
        generation = gen.generate(prompt, max_tokens=512, temperature=0.0)
        try:
            return parse_corruption(generation, num_corruptions, clean)
        except (BadCorruptionFormatError, NoOpCorruptionError) as exc:
            last_error = exc
    assert last_error is not None
    raise last_error


def sample_num_corruptions(rng: random.Random) -> int:
    """Uniform draw from {1, 2, 3}."""
    return rng.randint(1, 3)


def pack_instance(
    bins: EvidenceBins,
    clean: str,
    corruption: CorruptionOutput,
    seed_query: Query,
    rng_seed: int | str,
) -> TrainingInstance:
    """Assemble the 4-slot evidence context: gold first, then sampled negatives.

    When gold plus negatives cannot fill four slots, the lowest-scoring
    negative (or lowest-scoring gold if there are no negatives) repeats;
    such instances are detectable by duplicate ids in ``packed``.
    """
    if not bins.gold:
        raise ValueError("bins must contain at least one gold snippet")
    rng = random.Random(rng_seed)
    packed = list(bins.gold)
    shortfall = PACK_SIZE - len(packed)
    if shortfall > 0:
        sampled = rng.sample(list(bins.negatives), k=min(shortfall, len(bins.negatives)))
        packed.extend(sampled)
    while len(packed) < PACK_SIZE:
        packed.append(bins.negatives[-1] if bins.negatives else bins.gold[-1])
    return TrainingInstance(
        id=content_id(f"{seed_query.id}\x1f{clean}\x1f{corruption.corrupted}"),
        seed_query=seed_query,
        clean=clean,
        corrupted=corruption.corrupted,
        gold=bins.gold,
        negatives=bins.negatives,
        packed=tuple(packed[:PACK_SIZE]),
        corruption_reasoning=corruption.reasoning,
        num_corruptions=corruption.num_corruptions,
    )


def is_degenerate_pack(instance: TrainingInstance) -> bool:
    return len({e.id for e in instance.packed}) < PACK_SIZE


@dataclass
class DatagenConfig:
    threshold: float = DEFAULT_GOLD_THRESHOLD
    gold_cap: int = GOLD_CAP
    top_pages: int = DEFAULT_TOP_PAGES
    window: int = DEFAULT_WINDOW_WORDS
    stride: int = DEFAULT_STRIDE_WORDS
    parallelism: int = 4
    seed: int = 0
    parse_retries: int = DEFAULT_PARSE_RETRIES


def _token_estimate(*texts: str) -> int:
    return sum(len(t.split()) for t in texts)


def build_instance(
    seed_query: Query, clients: ClientBundle, config: DatagenConfig
) -> tuple[TrainingInstance, dict[str, int]]:
    """One seed query through search -> bin -> summarize -> corrupt -> pack.

    Returns the instance plus its whitespace-token cost estimate.
    """
    pages = clients.search.search(seed_query.text, config.top_pages)
    chunks: list[EvidenceSnippet] = []
    for page in pages:
        chunks.extend(chunk_passages(page.text, window=config.window, stride=config.stride, url=page.url, title=page.title))
    if not chunks:
        raise NoGoldError(f"no pages or chunks for seed query {seed_query.id!r}")
    scores = clients.scorer.score_pairs([(seed_query.text, c.text) for c in chunks])
    bins = bin_evidence(list(zip(chunks, scores)), threshold=config.threshold, gold_cap=config.gold_cap)

    clean = summarize_gold(bins.gold, clients.generation)
    rng = random.Random(f"{config.seed}:{seed_query.id}:k")
    k = sample_num_corruptions(rng)
    corruption = corrupt_statement(clean, k, clients.generation, parse_retries=config.parse_retries)

    tokens = {
        "prompt": _token_estimate(render_summarize([g.text for g in bins.gold]), render_corrupt(clean, k)),
        "completion": _token_estimate(clean, corruption.reasoning, corruption.corrupted),
        "calls": 2,
    }
    instance = pack_instance(bins, clean, corruption, seed_query, rng_seed=f"{config.seed}:{seed_query.id}:pack")
    return instance, tokens


def split_train_validation(
    instances: list[TrainingInstance], seed: int
) -> tuple[list[TrainingInstance], list[TrainingInstance]]:
    """Seed-stable split reserving ~10% (at least one) for validation.

    Validation picks come from a seeded shuffle of positions; both splits
    keep the original instance order.
    """
    if not instances:
        return [], []
    n_valid = max(1, len(instances) // 10)
    positions = list(range(len(instances)))
    random.Random(f"{seed}:split").shuffle(positions)
    valid_positions = set(positions[:n_valid])
    train = [inst for i, inst in enumerate(instances) if i not in valid_positions]
    valid = [inst for i, inst in enumerate(instances) if i in valid_positions]
    return train, valid


def generate_dataset(
    seed_queries: list[Query],
    clients: ClientBundle,
    config: DatagenConfig,
) -> tuple[list[TrainingInstance], list[TrainingInstance], RunReport]:
    """All seed queries through the pipeline, then a 90/10 split.

    Failed queries are skipped with a recorded reason; the run fails only
    when nothing was produced.
    """
    if not seed_queries:
        raise ValueError("at least one seed query required")
    report = RunReport()

    def one(query: Query):
        try:
            return build_instance(query, clients, config)
        except Exception as exc:
            return (query.id, exc)

    completed: dict[int, object] = {}
    with ThreadPoolExecutor(max_workers=max(1, config.parallelism)) as pool:
        futures = {pool.submit(one, q): i for i, q in enumerate(seed_queries)}
        try:
            for future in as_completed(futures):
                completed[futures[future]] = future.result()
        except KeyboardInterrupt:
            for future in futures:
                future.cancel()
            partial = _collect(completed, report)
            raise DatagenInterrupted(partial, report) from None

    instances = _collect(completed, report)

    if not instances:
        raise NoGoldError("no training instances produced")
    report.produced = len(instances)
    train, valid = split_train_validation(instances, config.seed)
    return train, valid, report


def _collect(completed: dict[int, object], report: RunReport) -> list[TrainingInstance]:
    """Fold finished outcomes (by input order) into instances and the report."""
    instances: list[TrainingInstance] = []
    for index in sorted(completed):
        outcome = completed[index]
        if isinstance(outcome, tuple) and isinstance(outcome[0], TrainingInstance):
            instance, tokens = outcome
            instances.append(instance)
            if is_degenerate_pack(instance):
                report.flagged.append(instance.id)
            for key, value in tokens.items():
                report.token_counts[key] += value
        else:
            query_id, exc = outcome
            logger.warning("seed query %s skipped: %s", query_id, exc)
            report.skipped.append({"query_id": query_id, "reason": f"{type(exc).__name__}: {exc}"})
    return instances
