"""End-to-end evaluation: research, select, edit, score, aggregate.

Produces per-claim edit records, aggregate attribution and preservation
means, both F1 aggregations (harmonic mean of the means, and the mean of
per-claim harmonic means), an edit-category breakdown, and a list of
claims whose post-edit attribution stays below the flagging threshold,
each with its intermediate state attached for manual failure analysis.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .clients import ClientBundle
from .core import Claim, EditCategory, EditRecord, record_to_dict
from .metrics import categorize_edit, f1_ap, preservation, statement_attribution
from .report import select_report
from .research import run_research
from .revision import edit_statement

logger = logging.getLogger(__name__)

LOW_ATTRIBUTION_THRESHOLD = 0.30


@dataclass
class EvalConfig:
    budget: int = 5
    slots: int = 4
    query_cap: int = 5
    top_pages: int = 5
    window: int = 128
    stride: int = 64
    parallelism: int = 4


@dataclass
class EvalReport:
    per_claim: list[EditRecord] = field(default_factory=list)
    aggregates: dict[str, float] = field(default_factory=dict)
    category_counts: dict[str, int] = field(default_factory=dict)
    low_attr_flags: list[str] = field(default_factory=list)
    flagged_details: dict[str, dict] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "per_claim": [record_to_dict(r) for r in self.per_claim],
            "aggregates": self.aggregates,
            "category_counts": self.category_counts,
            "low_attr_flags": self.low_attr_flags,
            "flagged_details": self.flagged_details,
            "failures": self.failures,
        }


def process_claim(claim: Claim, clients: ClientBundle, config: EvalConfig) -> tuple[EditRecord, dict]:
    """One claim through the full pipeline; returns the record and its
    intermediate state (queries, evidence, revision) for diagnostics."""
    research = run_research(
        claim,
        clients,
        query_cap=config.query_cap,
        top_pages=config.top_pages,
        window=config.window,
        stride=config.stride,
        parallelism=1,  # claim-level parallelism is owned by evaluate()
    )
    report = select_report(research.matrix, budget=config.budget)
    attr_before = statement_attribution(claim, report, clients.nli)
    revised = edit_statement(claim, report, clients.fused, slots=config.slots)
    attr_after = statement_attribution(revised, report, clients.nli)
    pres = preservation(claim.text, revised.text)
    f1 = f1_ap(attr_after.overall, pres)
    cats = categorize_edit(attr_before.overall, attr_after.overall, pres)
    record = EditRecord(
        original=claim,
        revised=revised,
        report=report,
        attr_before=attr_before.overall,
        attr_after=attr_after.overall,
        preservation=pres,
        f1_ap=f1,
        category=cats,
    )
    detail = {
        "queries": [{"id": q.id, "text": q.text} for q in research.queries],
        "evidence": [{"id": e.id, "text": e.text, "url": e.url} for e in research.evidence],
        "revised": revised.text,
    }
    return record, detail


def evaluate(claims: list[Claim], clients: ClientBundle, config: EvalConfig | None = None) -> EvalReport:
    """Run every claim, excluding failures from aggregates.

    Per-claim records come back sorted by claim id so output is stable
    under any completion order.
    """
    if not claims:
        raise ValueError("claims must be non-empty")
    config = config or EvalConfig()
    report = EvalReport()

    def one(claim: Claim):
        try:
            return process_claim(claim, clients, config)
        except Exception as exc:
            return (claim.id, exc)

    with ThreadPoolExecutor(max_workers=max(1, config.parallelism)) as pool:
        outcomes = list(pool.map(one, claims))

    details: dict[str, dict] = {}
    for claim, outcome in zip(claims, outcomes):
        if isinstance(outcome, tuple) and isinstance(outcome[0], EditRecord):
            record, detail = outcome
            report.per_claim.append(record)
            details[record.original.id] = detail
        else:
            claim_id, exc = outcome
            logger.warning("claim %s failed: %s", claim_id, exc)
            report.failures.append({"claim_id": claim_id, "reason": f"{type(exc).__name__}: {exc}"})

    report.per_claim.sort(key=lambda r: r.original.id)
    records = report.per_claim
    if records:
        n = len(records)
        attr_before_mean = sum(r.attr_before for r in records) / n
        attr_after_mean = sum(r.attr_after for r in records) / n
        pres_mean = sum(r.preservation for r in records) / n
        report.aggregates = {
            "attr_before_mean": attr_before_mean,
            "attr_after_mean": attr_after_mean,
            "pres_mean": pres_mean,
            "f1_of_means": f1_ap(attr_after_mean, pres_mean),
            "mean_of_f1s": sum(r.f1_ap for r in records) / n,
        }
    counts = {category.value: 0 for category in EditCategory}
    for r in records:
        for category in r.category:
            counts[category.value] += 1
    report.category_counts = counts
    report.low_attr_flags = sorted(r.original.id for r in records if r.attr_after < LOW_ATTRIBUTION_THRESHOLD)
    report.flagged_details = {cid: details[cid] for cid in report.low_attr_flags if cid in details}
    return report


def render_report(report: EvalReport, format: str = "text") -> bytes:
    """Render as deterministic JSON or a fixed-width text table."""
    if format == "json":
        return (json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n").encode("utf-8")
    if format != "text":
        raise ValueError(f"unknown format {format!r}")

    lines = []
    agg = report.aggregates
    lines.append(f"claims evaluated: {len(report.per_claim)}   failures: {len(report.failures)}")
    if not report.per_claim:
        lines.append("warning: no claims survived evaluation; aggregates unavailable")
    else:
        lines.append("")
        lines.append(f"{'Attr (x -> y)':>22}  {'Pres':>6}  {'F1(of means)':>12}  {'mean(F1)':>8}")
        lines.append(
            f"{agg['attr_before_mean']:>10.3f} -> {agg['attr_after_mean']:<8.3f}"
            f"{agg['pres_mean']:>6.3f}  {agg['f1_of_means']:>12.3f}  {agg['mean_of_f1s']:>8.3f}"
        )
    lines.append("")
    lines.append("edit categories:")
    for name in sorted(report.category_counts):
        lines.append(f"  {name:<12} {report.category_counts[name]}")
    lines.append("")
    lines.append(f"low-attribution claims (attr_after < {LOW_ATTRIBUTION_THRESHOLD}): {len(report.low_attr_flags)}")
    for cid in report.low_attr_flags:
        lines.append(f"  {cid}")
    return ("\n".join(lines) + "\n").encode("utf-8")
