"""Wire-format test vectors for conformance-checking a serving backend.

Any server claiming fixture-mode compatibility must answer these request
payloads with exactly these response payloads. Vectors are produced by
running this package's own mock clients, so they track the reference
behavior by construction.
"""

from __future__ import annotations

from typing import Sequence

from .clients import (
    GENERATE_FUSED_PATH,
    GENERATE_PATH,
    NLI_PATH,
    SCORE_PATH,
    SEARCH_PATH,
    FixtureSet,
    make_fixture_clients,
)
from .prompts import render_corrupt, render_query_generation, render_summarize
from .revision import render_segment

DEFAULT_VECTOR_SENTENCES = (
    "The bridge opened in 1932.",
    "Iron output doubled within a decade.",
    "The observatory sits at 2,400 meters.",
    "Its first director served nine years.",
)


def conformance_vectors(fixtures: FixtureSet, sentences: Sequence[str] = DEFAULT_VECTOR_SENTENCES) -> list[dict]:
    """Request/response pairs covering all five endpoints in fixture mode."""
    clients = make_fixture_clients(fixtures)
    vectors: list[dict] = []

    prompts = [
        render_query_generation(sentences[0]),
        render_summarize(list(sentences[:3])),
        render_corrupt(sentences[1], 2),
    ]
    for prompt in prompts:
        request = {"prompt": prompt, "max_tokens": 256, "temperature": 0.0}
        vectors.append(
            {
                "endpoint": GENERATE_PATH,
                "request": request,
                "response": {"text": clients.generation.generate(prompt, 256, 0.0)},
            }
        )

    segments = [render_segment(sentences[0], s) for s in sentences]
    vectors.append(
        {
            "endpoint": GENERATE_FUSED_PATH,
            "request": {"segments": segments, "max_tokens": 256},
            "response": {"text": clients.fused.generate_fused(segments, 256)},
        }
    )

    pairs = [(a, b) for a in sentences[:2] for b in sentences]
    vectors.append(
        {
            "endpoint": SCORE_PATH,
            "request": {"pairs": [[a, b] for a, b in pairs]},
            "response": {"scores": clients.scorer.score_pairs(pairs)},
        }
    )
    nli_pairs = pairs + [(s, s) for s in sentences]
    vectors.append(
        {
            "endpoint": NLI_PATH,
            "request": {"pairs": [[a, b] for a, b in nli_pairs]},
            "response": {"scores": clients.nli.nli(nli_pairs)},
        }
    )

    for record in fixtures.search_records[:3]:
        query = f"lookup {record['query_substring']} details"
        results = clients.search.search(query, 5)
        vectors.append(
            {
                "endpoint": SEARCH_PATH,
                "request": {"query": query, "top_k": 5},
                "response": {"results": [{"url": r.url, "title": r.title, "text": r.text} for r in results]},
            }
        )
    return vectors
