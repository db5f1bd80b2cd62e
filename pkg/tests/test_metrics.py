"""Sentence splitting, attribution, preservation, F1, and edit categories."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from claimedit.clients import HashNLIClient
from claimedit.core import AttributionReport, Claim, EditCategory, EvidenceSnippet
from claimedit.errors import EmptyTextError
from claimedit.metrics import (
    AttributionScore,
    categorize_edit,
    f1_ap,
    levenshtein,
    preservation,
    sentence_attribution,
    split_sentences,
    statement_attribution,
)
from conftest import make_sentences
from oracles import oracle_levenshtein, oracle_mean_of_maxes, oracle_preservation


def snippet(i: int, text: str) -> EvidenceSnippet:
    return EvidenceSnippet(id=f"e{i}", text=text, chunk_index=i)


def report_from(texts: list[str]) -> AttributionReport:
    return AttributionReport(
        evidence=tuple(snippet(i, t) for i, t in enumerate(texts)), coverage=0.0
    )


class FixedNLI:
    """NLI stub returning values from a (premise, hypothesis) -> score map."""

    def __init__(self, table: dict[tuple[str, str], float]):
        self.table = table

    def nli(self, pairs):
        return [self.table[(p, h)] for p, h in pairs]


# --- split_sentences ---------------------------------------------------------


def test_two_terminal_periods():
    split = split_sentences("It rained. We left.")
    assert split.sentences == ("It rained.", "We left.")


def test_abbreviation_not_split():
    assert split_sentences("Dr. Smith arrived.").sentences == ("Dr. Smith arrived.",)
    assert split_sentences("The U.S. Senate met. It adjourned.").sentences == (
        "The U.S. Senate met.",
        "It adjourned.",
    )


def test_decimal_number_not_split():
    text = "Pi is 3. 14 is not pi."  # digit-space-digit around the period splits
    assert len(split_sentences(text).sentences) == 2
    assert split_sentences("Pi is 3.14 exactly.").sentences == ("Pi is 3.14 exactly.",)


def test_question_and_exclamation():
    split = split_sentences("Really? Yes! Fine.")
    assert split.sentences == ("Really?", "Yes!", "Fine.")


def test_empty_text_raises():
    with pytest.raises(EmptyTextError):
        split_sentences("   ")


def test_spans_point_into_source():
    text = "  It rained.   We left early!  "
    split = split_sentences(text)
    for sentence, (start, end) in zip(split.sentences, split.spans):
        assert text[start:end] == sentence


def test_generate_and_recover_sentences(rng):
    for _ in range(50):
        sentences = make_sentences(rng, rng.randint(1, 6))
        recovered = split_sentences(" ".join(sentences)).sentences
        assert list(recovered) == sentences


# --- attribution -------------------------------------------------------------


def test_sentence_attribution_is_max():
    evidence = ["alpha source", "beta source", "gamma source"]
    table = {(e, "s one."): v for e, v in zip(evidence, (0.2, 0.9, 0.4))}
    score = sentence_attribution("s one.", report_from(evidence), FixedNLI(table))
    assert score == pytest.approx(0.9)


def test_single_evidence_passthrough():
    table = {("only source", "claim."): 0.37}
    assert sentence_attribution("claim.", report_from(["only source"]), FixedNLI(table)) == pytest.approx(0.37)


def test_statement_attribution_mean():
    claim = Claim(id="c", text="First part. Second part.")
    evidence = ["one", "two"]
    table = {
        ("one", "First part."): 0.8, ("two", "First part."): 0.2,
        ("one", "Second part."): 0.1, ("two", "Second part."): 0.4,
    }
    score = statement_attribution(claim, report_from(evidence), FixedNLI(table))
    assert score.per_sentence == (0.8, 0.4)
    assert score.overall == pytest.approx(0.6)


def test_statement_attribution_matches_bruteforce(rng):
    nli = HashNLIClient()
    for _ in range(25):
        sentences = make_sentences(rng, rng.randint(1, 5))
        evidence = [f"passage {rng.randint(0, 10**9)} about {rng.choice('abcde')}" for _ in range(rng.randint(1, 5))]
        claim = Claim(id="c", text=" ".join(sentences))
        got = statement_attribution(claim, report_from(evidence), nli)
        expected = oracle_mean_of_maxes(sentences, evidence, nli)
        assert got.overall == pytest.approx(expected, abs=1e-12)
        assert min(got.per_sentence) <= got.overall <= max(got.per_sentence)


def test_attribution_score_mean_invariant():
    score = AttributionScore.from_sentence_scores([0.2, 0.6])
    assert score.overall == pytest.approx(0.4)


# --- levenshtein / preservation ---------------------------------------------


def test_levenshtein_examples():
    assert levenshtein("", "abc") == 3
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein("same", "same") == 0


def test_levenshtein_nfc_stability():
    assert levenshtein("café", "café") == 0


def test_levenshtein_matches_oracle_random(rng):
    alphabet = "ab é中"
    for _ in range(150):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 24)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 24)))
        assert levenshtein(a, b) == oracle_levenshtein(a, b)


def test_preservation_examples():
    assert preservation("same text", "same text") == 1.0
    assert preservation("ab", "xyzw") == 0.0  # lev >= len(x) clamps to zero
    assert preservation("kitten", "sitting") == pytest.approx(0.5)


def test_preservation_empty_rules():
    assert preservation("", "") == 1.0
    assert preservation("", "anything") == 0.0


def test_preservation_matches_oracle(rng):
    for _ in range(50):
        x = "".join(rng.choice("abcd ") for _ in range(rng.randint(0, 16)))
        y = "".join(rng.choice("abcd ") for _ in range(rng.randint(0, 16)))
        assert preservation(x, y) == pytest.approx(oracle_preservation(x, y), abs=1e-12)


# --- f1 -----------------------------------------------------------------------


def test_f1_examples():
    assert f1_ap(0.598, 0.910) == pytest.approx(0.7217, abs=5e-5)
    assert f1_ap(0.0, 0.9) == 0.0
    assert f1_ap(0.0, 0.0) == 0.0
    assert f1_ap(0.44, 0.44) == pytest.approx(0.44)


def test_f1_rejects_out_of_range():
    with pytest.raises(ValueError):
        f1_ap(1.2, 0.5)
    with pytest.raises(ValueError):
        f1_ap(0.5, -0.1)


@settings(max_examples=200)
@given(
    a=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    p=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
)
def test_f1_symmetry_and_bounds(a, p):
    value = f1_ap(a, p)
    assert value == pytest.approx(f1_ap(p, a))
    assert value <= 2 * min(a, p) + 1e-12
    assert value <= max(a, p) + 1e-12


# --- categorize_edit -----------------------------------------------------------


def test_categorize_examples():
    assert categorize_edit(0.3, 0.9, 0.4) == {EditCategory.HUGE}
    assert categorize_edit(0.95, 0.50, 0.9) == {EditCategory.BAD, EditCategory.UNNECESSARY}
    assert categorize_edit(0.4, 0.75, 0.8) == {EditCategory.GOOD}
    assert categorize_edit(0.5, 0.5, 0.9) == {EditCategory.OTHER}


def test_categorize_grid_invariants():
    grid = [round(0.05 * i, 2) for i in range(21)]
    for before in grid:
        for after in grid:
            for pres in grid:
                cats = categorize_edit(before, after, pres)
                assert cats, "category set never empty"
                if EditCategory.UNNECESSARY in cats:
                    assert EditCategory.BAD in cats
                assert not (EditCategory.GOOD in cats and EditCategory.BAD in cats)
