"""Query generation, passage chunking, and per-query evidence search."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from claimedit.clients import (
    ClientBundle,
    FixtureGenerationClient,
    FixtureSearchClient,
    HashNLIClient,
    HashScoringClient,
    MockFusedClient,
    MockGenerationClient,
)
from claimedit.core import Claim, Query
from claimedit.errors import NoQueriesError, SearchEmptyError
from claimedit.research import chunk_passages, generate_queries, run_research, search_evidence


def bundle(search_records, generation=None) -> ClientBundle:
    return ClientBundle(
        generation=generation or FixtureGenerationClient(),
        fused=MockFusedClient(),
        scorer=HashScoringClient(),
        nli=HashNLIClient(),
        search=FixtureSearchClient(search_records),
    )


# --- generate_queries ---------------------------------------------------------


def test_queries_parsed_in_order():
    gen = MockGenerationClient(default="Q one\nQ two")
    queries = generate_queries(Claim(id="c", text="statement"), gen)
    assert [q.text for q in queries] == ["Q one", "Q two"]
    assert [q.id for q in queries] == ["c:q0", "c:q1"]


def test_blank_output_raises_no_queries():
    gen = MockGenerationClient(default="\n  \n")
    with pytest.raises(NoQueriesError):
        generate_queries(Claim(id="c", text="statement"), gen)


def test_query_cap_keeps_first_five():
    gen = MockGenerationClient(default="\n".join(f"q{i}" for i in range(8)))
    queries = generate_queries(Claim(id="c", text="statement"), gen, cap=5)
    assert [q.text for q in queries] == ["q0", "q1", "q2", "q3", "q4"]


def test_query_prompt_includes_context():
    gen = MockGenerationClient(default="q")
    claim = Claim(id="c", text="statement", context="earlier turn")
    generate_queries(claim, gen)
    assert "Context: earlier turn" in gen.calls[0]
    assert "Statement: statement" in gen.calls[0]


# --- chunk_passages -------------------------------------------------------------


def test_short_page_single_chunk():
    page = " ".join(f"w{i}" for i in range(100))
    chunks = chunk_passages(page, window=128, stride=64)
    assert len(chunks) == 1
    assert chunks[0].text == page
    assert chunks[0].chunk_index == 0


def test_window_arithmetic_on_numbered_words():
    # 256 plain tokens, no sentence punctuation, so no snapping applies:
    # expected starts are pure stride multiples until a window reaches the end
    page = " ".join(f"w{i:03d}" for i in range(256))
    chunks = chunk_passages(page, window=128, stride=64)
    starts = [c.text.split()[0] for c in chunks]
    assert starts == ["w000", "w064", "w128"]
    assert chunks[0].text.split() == [f"w{i:03d}" for i in range(128)]
    assert chunks[1].text.split() == [f"w{i:03d}" for i in range(64, 192)]
    assert chunks[2].text.split() == [f"w{i:03d}" for i in range(128, 256)]


def test_snapping_extends_to_sentence_boundaries():
    # sentences of 10 words; window 25 ends mid-sentence, boundary at word 30
    # lies within 20 words of both edges
    sentences = [" ".join([f"s{k}w{j}" for j in range(9)]) + "." for k in range(8)]
    page = " ".join(s.capitalize() for s in sentences)
    chunks = chunk_passages(page, window=25, stride=25)
    for chunk in chunks:
        assert chunk.text in page  # contiguous
        # snapped chunks start at sentence starts (capitalized token)
        assert chunk.text[0].isupper()


def test_empty_page_yields_no_chunks():
    assert chunk_passages("   ") == []


def test_chunk_window_validation():
    with pytest.raises(ValueError):
        chunk_passages("words", window=4, stride=9)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=999), min_size=1, max_size=400))
def test_chunks_are_contiguous_substrings(word_ids):
    page = " ".join(f"tok{i}" for i in word_ids)
    for chunk in chunk_passages(page, window=32, stride=16):
        assert chunk.text in page


def test_chunk_provenance_stamped():
    chunks = chunk_passages("Some words here.", url="https://x", title="T")
    assert chunks[0].url == "https://x"
    assert chunks[0].title == "T"


# --- search_evidence -------------------------------------------------------------


class TableScorer:
    """Scores by substring lookup table, defaulting to 0."""

    def __init__(self, table):
        self.table = table

    def score_pairs(self, pairs):
        return [next((v for k, v in self.table.items() if k in p), 0.0) for _, p in pairs]


def test_search_argmax_chunk():
    pages = [{"url": "u", "title": "t", "text": "Alpha words here. Beta words here. Gamma words here."}]
    client = FixtureSearchClient([{"query_substring": "q", "pages": pages}])
    scorer = TableScorer({"Alpha": 0.1, "Beta": 0.7, "Gamma": 0.3})
    # window == sentence length makes each chunk exactly one sentence
    best, scored = search_evidence(Query(id="q0", text="q"), client, scorer, window=3, stride=3)
    assert best.text == "Beta words here."
    assert best.relevance == {"q0": 0.7}
    assert len(scored) == 3


def test_search_tie_prefers_first_page():
    pages = [
        {"url": "first", "title": "", "text": "same text body"},
        {"url": "second", "title": "", "text": "same text body"},
    ]
    client = FixtureSearchClient([{"query_substring": "q", "pages": pages}])
    scorer = TableScorer({"same": 0.5})
    best, _ = search_evidence(Query(id="q0", text="q"), client, scorer)
    assert best.url == "first"


def test_search_empty_raises_with_query_id():
    client = FixtureSearchClient([])
    with pytest.raises(SearchEmptyError, match="q77"):
        search_evidence(Query(id="q77", text="unknown"), client, HashScoringClient())


def test_search_best_matches_bruteforce(rng: random.Random):
    scorer = HashScoringClient()
    for trial in range(20):
        pages = [
            {
                "url": f"u{p}",
                "title": "",
                "text": " ".join(f"word{rng.randint(0, 50)}" for _ in range(rng.randint(5, 60))),
            }
            for p in range(rng.randint(1, 4))
        ]
        client = FixtureSearchClient([{"query_substring": "q", "pages": pages}])
        query = Query(id=f"q{trial}", text=f"q {trial}")
        best, scored = search_evidence(query, client, scorer, window=16, stride=8)
        exhaustive = max(s for _, s in scored)
        assert best.relevance[query.id] == pytest.approx(exhaustive)


# --- run_research -----------------------------------------------------------------


def one_page_records(text="The fact one is documented. The fact two is documented."):
    return [{"query_substring": "fact", "pages": [{"url": "u", "title": "t", "text": text}]}]


def test_single_query_single_evidence():
    gen = MockGenerationClient(default="fact check line")
    result = run_research(Claim(id="c", text="statement"), bundle(one_page_records(), gen))
    assert len(result.queries) == 1
    assert len(result.evidence) == 1
    assert result.matrix.scores.shape == (1, 1)
    assert all(s.ok for s in result.statuses)


def test_identical_best_snippets_deduped():
    gen = MockGenerationClient(default="fact alpha\nfact beta")
    result = run_research(Claim(id="c", text="statement"), bundle(one_page_records(), gen))
    assert len(result.queries) == 2
    assert len(result.evidence) == 1  # same single page chunk for both queries
    assert result.matrix.scores.shape == (2, 1)


def test_failed_query_recorded_but_run_continues():
    gen = MockGenerationClient(default="fact alpha\nmystery beta")
    records = one_page_records()  # only 'fact' queries match
    result = run_research(Claim(id="c", text="statement"), bundle(records, gen))
    assert len(result.queries) == 2
    by_ok = {s.ok for s in result.statuses}
    assert by_ok == {True, False}


def test_all_queries_failing_raises():
    gen = MockGenerationClient(default="mystery only")
    with pytest.raises(SearchEmptyError):
        run_research(Claim(id="c", text="statement"), bundle(one_page_records(), gen))


def test_matrix_entries_equal_direct_scorer_output():
    gen = MockGenerationClient(default="fact alpha\nfact beta\nfact gamma")
    clients = bundle(one_page_records("One chunk sentence only."), gen)
    result = run_research(Claim(id="c", text="statement"), clients)
    for i, q in enumerate(result.queries):
        for j, e in enumerate(result.evidence):
            direct = clients.scorer.score_pairs([(q.text, e.text)])[0]
            assert result.matrix.scores[i, j] == direct


def test_research_output_schedule_independent():
    gen = MockGenerationClient(default="fact a\nfact b\nfact c\nfact d")
    records = [
        {
            "query_substring": "fact",
            "pages": [
                {"url": f"u{i}", "title": "", "text": f"Page {i} covers the fact in sentence {i}."}
                for i in range(3)
            ],
        }
    ]
    results = []
    for parallelism in (1, 4):
        result = run_research(Claim(id="c", text="statement"), bundle(records, gen), parallelism=parallelism)
        results.append(
            (
                tuple(q.text for q in result.queries),
                tuple(e.id for e in result.evidence),
                result.matrix.scores.tobytes(),
            )
        )
    assert results[0] == results[1]


def test_evidence_carries_provenance():
    gen = MockGenerationClient(default="fact alpha")
    result = run_research(Claim(id="c", text="statement"), bundle(one_page_records(), gen))
    assert all(e.url for e in result.evidence)
