"""Command-line entry: serve the endpoints or export training data."""

from __future__ import annotations

import sys

import click

from .app import serve as run_server
from .config import DEFAULT_GENERATOR, DEFAULT_NLI, DEFAULT_RERANKER, ShimConfig, ShimConfigError
from .export import export_fid_training


@click.group()
def main():
    pass


@main.command("serve")
@click.option("--mode", type=click.Choice(["models", "fixtures"]), default="fixtures")
@click.option("--fixture-path", type=click.Path(), default=None, help="Fixture JSONL (required in fixtures mode; serves /search in models mode).")
@click.option("--generator-model", default=DEFAULT_GENERATOR, show_default=True)
@click.option("--reranker-model", default=DEFAULT_RERANKER, show_default=True)
@click.option("--nli-model", default=DEFAULT_NLI, show_default=True)
@click.option("--device", default="cpu", show_default=True)
@click.option("--port", type=int, default=8080, show_default=True)
def cmd_serve(mode, fixture_path, generator_model, reranker_model, nli_model, device, port):
    """Run the five-endpoint server."""
    config = ShimConfig(
        mode=mode,
        fixture_path=fixture_path,
        generator_model=generator_model,
        reranker_model=reranker_model,
        nli_model=nli_model,
        device=device,
        port=port,
    )
    try:
        config.validate()
    except ShimConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    run_server(config)


@main.command("export")
@click.argument("instances_file", type=click.Path(exists=True))
@click.argument("out_stem", type=click.Path())
def cmd_export(instances_file, out_stem):
    """Render training instances into paired .source/.target files."""
    source_path, target_path = export_fid_training(instances_file, out_stem)
    click.echo(f"wrote {source_path} and {target_path}")


if __name__ == "__main__":
    main()
