"""Full-pipeline evaluation: aggregates, categories, flags, rendering."""

from __future__ import annotations

import json

import pytest

from claimedit.clients import (
    ClientBundle,
    FixtureGenerationClient,
    FixtureFusedClient,
    FixtureSearchClient,
    HashNLIClient,
    HashScoringClient,
)
from claimedit.core import Claim, EditCategory
from claimedit.evalharness import EvalConfig, EvalReport, evaluate, render_report
from conftest import build_eval_fixture
from oracles import oracle_f1, oracle_preservation


def eval_bundle(fixture, nli=None) -> ClientBundle:
    return ClientBundle(
        generation=FixtureGenerationClient(),
        fused=FixtureFusedClient(fixture.edit_records),
        scorer=HashScoringClient(),
        nli=nli or HashNLIClient(),
        search=FixtureSearchClient(list(fixture.search_records)),
    )


def claims_from(rows: list[dict]) -> list[Claim]:
    return [Claim(id=r["id"], text=r["text"]) for r in rows]


def test_all_abstain_preserves_everything():
    fixture, rows = build_eval_fixture(4)
    report = evaluate(claims_from(rows), eval_bundle(fixture), EvalConfig())
    assert len(report.per_claim) == 4
    assert report.aggregates["pres_mean"] == 1.0
    assert report.aggregates["attr_before_mean"] == report.aggregates["attr_after_mean"]
    for record in report.per_claim:
        assert record.preservation == 1.0
        assert record.attr_before == record.attr_after
        assert record.revised.text == record.original.text


REVISION_1 = "The subject01 finding was changed."
REVISION_2 = "An entirely new subject02 account."


def hand_built_case():
    fixture, rows = build_eval_fixture(
        3,
        edits=[("subject01", REVISION_1), ("subject02", REVISION_2)],
    )
    nli = HashNLIClient(
        overrides=[
            ("subject00", "reported early", 0.4),
            ("subject00", "confirmed by later", 0.8),
            ("subject01", "changed", 0.9),
            ("subject01", "reported early", 0.2),
            ("subject01", "confirmed by later", 0.4),
            ("subject02", "entirely new", 0.1),
            ("subject02", "reported early", 0.5),
            ("subject02", "confirmed by later", 0.5),
        ]
    )
    return fixture, rows, nli


def test_three_claims_match_hand_computed_aggregates():
    fixture, rows, nli = hand_built_case()
    claims = claims_from(rows)
    report = evaluate(claims, eval_bundle(fixture, nli), EvalConfig())
    assert [r.original.id for r in report.per_claim] == ["claim00", "claim01", "claim02"]

    attr_before = [0.6, 0.3, 0.5]  # per-claim means of the pinned sentence scores
    attr_after = [0.6, 0.9, 0.1]
    pres = [
        1.0,
        oracle_preservation(rows[1]["text"], REVISION_1),
        oracle_preservation(rows[2]["text"], REVISION_2),
    ]
    for record, eb, ea, p in zip(report.per_claim, attr_before, attr_after, pres):
        assert record.attr_before == pytest.approx(eb, abs=1e-9)
        assert record.attr_after == pytest.approx(ea, abs=1e-9)
        assert record.preservation == pytest.approx(p, abs=1e-9)

    agg = report.aggregates
    assert agg["attr_before_mean"] == pytest.approx(sum(attr_before) / 3, abs=1e-9)
    assert agg["attr_after_mean"] == pytest.approx(sum(attr_after) / 3, abs=1e-9)
    assert agg["pres_mean"] == pytest.approx(sum(pres) / 3, abs=1e-9)
    assert agg["f1_of_means"] == pytest.approx(oracle_f1(sum(attr_after) / 3, sum(pres) / 3), abs=1e-9)
    mean_f1 = sum(oracle_f1(a, p) for a, p in zip(attr_after, pres)) / 3
    assert agg["mean_of_f1s"] == pytest.approx(mean_f1, abs=1e-9)


def test_low_attribution_flagged_with_details():
    fixture, rows, nli = hand_built_case()
    report = evaluate(claims_from(rows), eval_bundle(fixture, nli), EvalConfig())
    assert report.low_attr_flags == ["claim02"]
    detail = report.flagged_details["claim02"]
    assert detail["revised"] == REVISION_2
    assert detail["queries"] and detail["evidence"]


def test_category_counts_consistent_with_records():
    fixture, rows, nli = hand_built_case()
    report = evaluate(claims_from(rows), eval_bundle(fixture, nli), EvalConfig())
    for category, count in report.category_counts.items():
        expected = sum(1 for r in report.per_claim if EditCategory(category) in r.category)
        assert count == expected
    assert report.category_counts["Unnecessary"] <= report.category_counts["Bad"]
    for r in report.per_claim:
        assert not ({EditCategory.GOOD, EditCategory.BAD} <= r.category)


def test_failed_claims_excluded_not_fatal():
    fixture, rows = build_eval_fixture(2)
    claims = claims_from(rows) + [Claim(id="claim-miss", text="about nothing the fixture knows")]
    report = evaluate(claims, eval_bundle(fixture), EvalConfig())
    assert len(report.per_claim) == 2
    assert [f["claim_id"] for f in report.failures] == ["claim-miss"]


def test_evaluate_rejects_empty_input():
    fixture, _ = build_eval_fixture(1)
    with pytest.raises(ValueError):
        evaluate([], eval_bundle(fixture), EvalConfig())


def test_render_empty_report_warns():
    text = render_report(EvalReport(), "text").decode("utf-8")
    assert "warning" in text
    assert "claims evaluated: 0" in text


def test_render_is_deterministic_snapshot():
    fixture, rows, nli = hand_built_case()
    report = evaluate(claims_from(rows), eval_bundle(fixture, nli), EvalConfig())
    assert render_report(report, "text") == render_report(report, "text")
    assert render_report(report, "json") == render_report(report, "json")
    text = render_report(report, "text").decode("utf-8")
    assert "Attr (x -> y)" in text and "Pres" in text and "claim02" in text


def test_render_json_roundtrips():
    fixture, rows, nli = hand_built_case()
    report = evaluate(claims_from(rows), eval_bundle(fixture, nli), EvalConfig())
    parsed = json.loads(render_report(report, "json").decode("utf-8"))
    assert parsed == report.to_dict()
    assert parsed["aggregates"]["pres_mean"] == report.aggregates["pres_mean"]


def test_render_rejects_unknown_format():
    with pytest.raises(ValueError):
        render_report(EvalReport(), "yaml")


def test_evaluate_schedule_independent():
    fixture, rows, nli = hand_built_case()
    reports = [
        evaluate(claims_from(rows), eval_bundle(fixture, nli), EvalConfig(parallelism=p))
        for p in (1, 4)
    ]
    assert render_report(reports[0], "json") == render_report(reports[1], "json")
