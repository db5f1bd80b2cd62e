"""Shared test fixtures: deterministic search corpora and sentence factories."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from claimedit.clients import FixtureSet, stable_unit_hash

WORDS = (
    "river stone harbor light engine valley copper wheat garden bridge "
    "signal market orchard tunnel meadow candle lantern summit forest cabin"
).split()


def make_sentence(rng: random.Random, terminal: str | None = None) -> str:
    """A simple declarative sentence the rule-based splitter must recover."""
    n = rng.randint(3, 8)
    words = [rng.choice(WORDS) for _ in range(n)]
    words[0] = words[0].capitalize()
    return " ".join(words) + (terminal or rng.choice(".!?"))


def make_sentences(rng: random.Random, count: int) -> list[str]:
    return [make_sentence(rng) for _ in range(count)]


def gold_page_text(seed_query: str, topic: str, variant_base: int = 0) -> str:
    """A one-chunk page whose hash relevance to ``seed_query`` clears 0.5.

    The fixture scorer hashes (query, chunk text); we search variant
    counters until one lands at or above the gold threshold, which takes
    about two tries on average and is fully deterministic.
    """
    for variant in range(variant_base, variant_base + 200):
        text = (
            f"Report {variant} covers {topic}. "
            f"The {topic} records from archive {variant} confirm the figures. "
            f"Independent sources describe {topic} in matching detail."
        )
        if stable_unit_hash("score", seed_query, text) >= 0.5:
            return text
    raise AssertionError("no gold-scoring page variant found")


def filler_page_text(topic: str, variant: int) -> str:
    return (
        f"Notes {variant} mention {topic} in passing. "
        f"Further reading lists {topic} among many subjects from file {variant}."
    )


def build_datagen_fixture(n_topics: int) -> tuple[FixtureSet, list[str]]:
    """Search fixture plus seed-query lines, one instance guaranteed per seed."""
    records = []
    seeds = []
    for i in range(n_topics):
        topic = f"topic{i:02d}"
        seed = f"about {topic} please"
        seeds.append(seed)
        pages = [
            {"url": f"https://example.org/{topic}/gold", "title": f"{topic} gold", "text": gold_page_text(seed, topic)},
            {"url": f"https://example.org/{topic}/n1", "title": f"{topic} n1", "text": filler_page_text(topic, 1)},
            {"url": f"https://example.org/{topic}/n2", "title": f"{topic} n2", "text": filler_page_text(topic, 2)},
            {"url": f"https://example.org/{topic}/n3", "title": f"{topic} n3", "text": filler_page_text(topic, 3)},
            {"url": f"https://example.org/{topic}/n4", "title": f"{topic} n4", "text": filler_page_text(topic, 4)},
        ]
        records.append({"query_substring": topic, "pages": pages})
    return FixtureSet(search_records=tuple(records)), seeds


def build_eval_fixture(n_claims: int, edits: list[tuple[str, str]] | None = None) -> tuple[FixtureSet, list[dict]]:
    """Search fixture plus claim rows for evaluation runs.

    Claims mention their topic so the fixture query generator produces
    queries the search fixture matches.
    """
    records = []
    claims = []
    for i in range(n_claims):
        topic = f"subject{i:02d}"
        claims.append(
            {
                "id": f"claim{i:02d}",
                "text": f"The {topic} finding was reported early. It was confirmed by later work on {topic}.",
            }
        )
        pages = [
            {
                "url": f"https://example.org/{topic}/p{v}",
                "title": f"{topic} page {v}",
                "text": (
                    f"Study {v} examined {topic} closely. "
                    f"The {topic} finding appears in revision {v} of the archive."
                ),
            }
            for v in range(3)
        ]
        records.append({"query_substring": topic, "pages": pages})
    return (
        FixtureSet(
            search_records=tuple(records),
            edit_records=tuple(edits or ()),
        ),
        claims,
    )


def write_fixture_file(path: Path, fixture: FixtureSet) -> Path:
    """Serialize a FixtureSet to the JSONL format --fixtures expects."""
    lines = [json.dumps(record, ensure_ascii=False) for record in fixture.search_records]
    lines += [
        json.dumps({"claim_substring": sub, "revision": rev}, ensure_ascii=False)
        for sub, rev in fixture.edit_records
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)
