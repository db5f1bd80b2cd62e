"""Command-line entry point: datagen | edit | evaluate | metrics.

Exit codes: 0 clean, 1 completed with per-item skips or failures,
2 fatal (bad config, unreadable input, nothing produced). Interrupts
flush whatever finished plus a truncation marker line and exit 130.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Iterable, Iterator

import click

from .config import RunConfig, build_clients, load_run_config
from .core import (
    TRUNCATION_KEY,
    AttributionReport,
    Claim,
    EvidenceSnippet,
    Query,
    content_id,
    deserialize_dataset,
    record_to_dict,
    serialize_dataset,
)
from .datagen import DatagenConfig, DatagenInterrupted, generate_dataset
from .errors import ClaimeditError, ConfigError
from .evalharness import EvalConfig, evaluate, process_claim, render_report
from .metrics import f1_ap, preservation, statement_attribution
from .report import dedupe_evidence, select_report
from .research import run_research
from .revision import edit_statement

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_FATAL = 2
EXIT_INTERRUPTED = 130


def write_jsonl_with_truncation(path: Path, lines: Iterable[str]) -> None:
    """Stream JSONL lines to ``path``; on interrupt, append a truncation
    marker so readers can tell the file is a partial result."""
    with open(path, "w", encoding="utf-8") as handle:
        try:
            for line in lines:
                handle.write(line + "\n")
        except KeyboardInterrupt:
            handle.write(json.dumps({TRUNCATION_KEY: True}) + "\n")
            handle.flush()
            raise


def _common_options(fn):
    options = [
        click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file."),
        click.option("--seed", type=int, default=None, help="Master seed for all randomness."),
        click.option("--parallelism", type=int, default=None, help="Concurrent worker bound."),
        click.option("--fixtures", type=click.Path(), default=None, help="Fixture file enabling offline mock clients."),
        click.option("--budget", type=int, default=None, help="Report evidence budget (1-5)."),
        click.option("--slots", type=int, default=None, help="Editor evidence slots."),
        click.option("--threshold", type=float, default=None, help="Gold relevance threshold."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _setup(config_path, **flags) -> tuple[RunConfig, object]:
    config = load_run_config(config_path, flag_overrides=flags)
    return config, build_clients(config)


def _fatal(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_FATAL)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log per-item progress.")
def main(verbose: bool):
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")


@main.command("datagen")
@click.argument("seed_file", type=click.Path())
@click.argument("out_dir", type=click.Path())
@_common_options
def cmd_datagen(seed_file, out_dir, config_path, **flags):
    """Build editor-training data from a file of seed queries (one per line)."""
    try:
        config, clients = _setup(config_path, **flags)
    except ConfigError as exc:
        _fatal(str(exc))
    seed_path = Path(seed_file)
    if not seed_path.exists():
        _fatal(f"seed file not found: {seed_path}")
    queries = [
        Query(id=f"seed{i:04d}-{content_id(line)[:8]}", text=line)
        for i, line in enumerate(seed_path.read_text(encoding="utf-8").splitlines())
        if line.strip()
    ]
    if not queries:
        _fatal(f"seed file {seed_path} holds no queries")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    datagen_config = DatagenConfig(
        threshold=config.threshold,
        gold_cap=config.gold_cap,
        top_pages=config.top_pages,
        window=config.window,
        stride=config.stride,
        parallelism=config.parallelism,
        seed=config.seed,
    )
    try:
        train, valid, report = generate_dataset(queries, clients, datagen_config)
    except DatagenInterrupted as partial:
        payload = serialize_dataset(partial.instances) + (json.dumps({TRUNCATION_KEY: True}) + "\n").encode("utf-8")
        (out / "partial.jsonl").write_bytes(payload)
        report_dict = partial.report.to_dict() | {"interrupted": True}
        (out / "run_report.json").write_text(json.dumps(report_dict, indent=2) + "\n", encoding="utf-8")
        click.echo(f"interrupted; flushed {len(partial.instances)} finished instance(s)", err=True)
        sys.exit(EXIT_INTERRUPTED)
    except ClaimeditError as exc:
        _fatal(str(exc))

    (out / "train.jsonl").write_bytes(serialize_dataset(train))
    (out / "valid.jsonl").write_bytes(serialize_dataset(valid))
    (out / "run_report.json").write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    click.echo(f"produced {report.produced} instances ({len(train)} train / {len(valid)} valid), skipped {len(report.skipped)}")
    sys.exit(EXIT_PARTIAL if report.skipped else EXIT_OK)


def _load_claims(claims_file) -> list[Claim]:
    path = Path(claims_file)
    if not path.exists():
        _fatal(f"claims file not found: {path}")
    try:
        claims = deserialize_dataset(path.read_bytes(), Claim)
    except ClaimeditError as exc:
        _fatal(f"{path}: {exc}")
    if not claims:
        _fatal(f"claims file {path} holds no claims")
    return claims


@main.command("edit")
@click.argument("claims_file", type=click.Path())
@click.argument("out_file", type=click.Path())
@click.option("--no-metrics", is_flag=True, help="Skip attribution/preservation scoring.")
@_common_options
def cmd_edit(claims_file, out_file, no_metrics, config_path, **flags):
    """Research and revise each claim, writing one record per line."""
    try:
        config, clients = _setup(config_path, **flags)
    except ConfigError as exc:
        _fatal(str(exc))
    claims = _load_claims(claims_file)
    eval_config = EvalConfig(
        budget=config.budget,
        slots=config.slots,
        query_cap=config.query_cap,
        top_pages=config.top_pages,
        window=config.window,
        stride=config.stride,
        parallelism=config.parallelism,
    )

    failures: list[str] = []

    def rows() -> Iterator[str]:
        for claim in claims:
            try:
                if no_metrics:
                    research = run_research(
                        claim, clients, query_cap=config.query_cap, top_pages=config.top_pages,
                        window=config.window, stride=config.stride, parallelism=config.parallelism,
                    )
                    report = select_report(research.matrix, budget=config.budget)
                    revised = edit_statement(claim, report, clients.fused, slots=config.slots)
                    row = {
                        "original": record_to_dict(claim),
                        "revised": record_to_dict(revised),
                        "report": record_to_dict(report),
                    }
                else:
                    record, _ = process_claim(claim, clients, eval_config)
                    row = record_to_dict(record)
                logger.info("edited claim %s", claim.id)
                yield json.dumps(row, ensure_ascii=False)
            except KeyboardInterrupt:
                raise
            except Exception as exc:
                logger.warning("claim %s failed: %s", claim.id, exc)
                failures.append(claim.id)

    try:
        write_jsonl_with_truncation(Path(out_file), rows())
    except KeyboardInterrupt:
        sys.exit(EXIT_INTERRUPTED)
    if failures and len(failures) == len(claims):
        _fatal("every claim failed")
    sys.exit(EXIT_PARTIAL if failures else EXIT_OK)


@main.command("evaluate")
@click.argument("claims_file", type=click.Path())
@click.argument("out_dir", type=click.Path())
@_common_options
def cmd_evaluate(claims_file, out_dir, config_path, **flags):
    """Full pipeline over an evaluation set; writes JSON and text reports."""
    try:
        config, clients = _setup(config_path, **flags)
    except ConfigError as exc:
        _fatal(str(exc))
    claims = _load_claims(claims_file)
    eval_config = EvalConfig(
        budget=config.budget,
        slots=config.slots,
        query_cap=config.query_cap,
        top_pages=config.top_pages,
        window=config.window,
        stride=config.stride,
        parallelism=config.parallelism,
    )
    try:
        report = evaluate(claims, clients, eval_config)
    except KeyboardInterrupt:
        sys.exit(EXIT_INTERRUPTED)
    except ClaimeditError as exc:
        _fatal(str(exc))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_bytes(render_report(report, "json"))
    (out / "report.txt").write_bytes(render_report(report, "text"))
    click.echo(render_report(report, "text").decode("utf-8"), nl=False)
    if not report.per_claim:
        sys.exit(EXIT_FATAL)
    sys.exit(EXIT_PARTIAL if report.failures else EXIT_OK)


@main.command("metrics")
@click.argument("pairs_file", type=click.Path())
@_common_options
def cmd_metrics(pairs_file, config_path, **flags):
    """Score (x, y, evidence) triples, or emit F1 for {attr_after, pres} rows."""
    try:
        config, clients = _setup(config_path, **flags)
    except ConfigError as exc:
        _fatal(str(exc))
    path = Path(pairs_file)
    if not path.exists():
        _fatal(f"pairs file not found: {path}")

    had_errors = False
    for ln, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            if "attr_after" in row and "pres" in row:
                result = {"f1_ap": f1_ap(float(row["attr_after"]), float(row["pres"]))}
            else:
                result = _score_triple(row, clients, config)
        except KeyboardInterrupt:
            sys.exit(EXIT_INTERRUPTED)
        except Exception as exc:
            logger.warning("line %d failed: %s", ln, exc)
            click.echo(json.dumps({"line": ln, "error": str(exc)}), err=True)
            had_errors = True
            continue
        click.echo(json.dumps(result, ensure_ascii=False))
    sys.exit(EXIT_PARTIAL if had_errors else EXIT_OK)


def _score_triple(row: dict, clients, config: RunConfig) -> dict:
    x = str(row["x"])
    y = str(row["y"])
    evidence_texts = [e if isinstance(e, str) else e["text"] for e in row["evidence"]]
    snippets = dedupe_evidence(
        [EvidenceSnippet(id=content_id(t), text=t, chunk_index=i) for i, t in enumerate(evidence_texts)]
    )[:config.budget]
    report = AttributionReport(evidence=tuple(snippets), coverage=0.0)
    claim_x = Claim(id=row.get("id", content_id(x)), text=x)
    claim_y = Claim(id=claim_x.id, text=y)
    attr_before = statement_attribution(claim_x, report, clients.nli)
    attr_after = statement_attribution(claim_y, report, clients.nli)
    pres = preservation(x, y)
    return {
        "id": claim_x.id,
        "attr_before": attr_before.overall,
        "attr_after": attr_after.overall,
        "pres": pres,
        "f1_ap": f1_ap(attr_after.overall, pres),
    }


if __name__ == "__main__":
    main()
