"""Versioned prompt templates and their renderers.

Templates live as text files next to this module. Rendering uses literal
placeholder replacement (not str.format) so braces inside statement or
evidence text cannot break a render.
"""

from __future__ import annotations

from importlib import resources

SUMMARIZE_TEMPLATE_NAME = "summarize_v1.txt"
CORRUPT_TEMPLATE_NAME = "corrupt_v1.txt"
QUERY_TEMPLATE_NAME = "query_generation_v1.txt"

# Stable prefixes used by the deterministic fixture clients to recognize
# which template an incoming prompt was rendered from.
SUMMARIZE_PREFIX = "Summarize all the pieces of text."
CORRUPT_PREFIX = "Corrupt the text by first generating a reasoning"
QUERY_PREFIX = "Write web search queries"


def _load(name: str) -> str:
    return resources.files("claimedit.prompts").joinpath(name).read_text(encoding="utf-8")


def summarize_template() -> str:
    return _load(SUMMARIZE_TEMPLATE_NAME)


def corrupt_template() -> str:
    return _load(CORRUPT_TEMPLATE_NAME)


def query_template() -> str:
    return _load(QUERY_TEMPLATE_NAME)


def render_summarize(texts: list[str]) -> str:
    """Fill the summarization template with newline-joined source texts."""
    return summarize_template().replace("{text}", "\n".join(texts))


def render_corrupt(text: str, num_corruptions: int) -> str:
    return (
        corrupt_template()
        .replace("{text}", text)
        .replace("{num_corruptions}", str(num_corruptions))
    )


def render_query_generation(statement: str, context: str | None = None) -> str:
    context_line = f"Context: {context}\n" if context else ""
    return (
        query_template()
        .replace("{context_line}", context_line)
        .replace("{statement}", statement)
    )
