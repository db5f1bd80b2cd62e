"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ClaimeditError(Exception):
    """Base class for all package errors."""


class SerializationError(ClaimeditError):
    """A record could not be written; carries the offending record id."""

    def __init__(self, record_id: str, reason: str):
        self.record_id = record_id
        super().__init__(f"record {record_id!r}: {reason}")


class DeserializationError(ClaimeditError):
    """A JSONL line could not be read; carries the 1-based line number."""

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {reason}")


class EmptyTextError(ClaimeditError):
    """Raised when an operation requires non-empty text."""


class EmptyEvidenceError(ClaimeditError):
    """Raised when a report is requested over zero evidence snippets."""


class NoQueriesError(ClaimeditError):
    """Query generation produced no parseable queries."""


class SearchEmptyError(ClaimeditError):
    """Every page fetch for a query failed or yielded no chunks."""

    def __init__(self, query_id: str):
        self.query_id = query_id
        super().__init__(f"no evidence found for query {query_id!r}")


class NoGoldError(ClaimeditError):
    """No scored passage cleared the gold threshold."""


class EmptySummaryError(ClaimeditError):
    """The summarizer returned only whitespace."""


class BadCorruptionFormatError(ClaimeditError):
    """Corruption generation lacked the expected output marker."""


class NoOpCorruptionError(ClaimeditError):
    """The corrupted statement came back identical to the clean one."""


class TransientFailure(ClaimeditError):
    """Retryable service failure (timeout, 5xx)."""


class PermanentFailure(ClaimeditError):
    """Non-retryable service failure (4xx, contract violation)."""


class ConfigError(ClaimeditError):
    """Invalid or unknown configuration."""
