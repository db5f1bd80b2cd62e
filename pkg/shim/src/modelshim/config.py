"""Shim configuration and startup validation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

DEFAULT_GENERATOR = "google/flan-t5-small"
DEFAULT_RERANKER = "cross-encoder/ms-marco-MiniLM-L-6-v2"
DEFAULT_NLI = "cross-encoder/nli-MiniLM2-L6-H768"


class ShimConfigError(ValueError):
    pass


class ShimStartupError(RuntimeError):
    """Raised when a backend cannot come up; names the failing endpoint."""


@dataclass
class ShimConfig:
    mode: str = "fixtures"
    generator_model: str | None = DEFAULT_GENERATOR
    reranker_model: str | None = DEFAULT_RERANKER
    nli_model: str | None = DEFAULT_NLI
    device: str = "cpu"
    port: int = 8080
    fixture_path: str | None = None

    def validate(self) -> "ShimConfig":
        if self.mode not in ("models", "fixtures"):
            raise ShimConfigError(f"mode must be 'models' or 'fixtures', got {self.mode!r}")
        if self.mode == "fixtures":
            if not self.fixture_path:
                raise ShimConfigError("fixtures mode requires a fixture path")
            if not Path(self.fixture_path).exists():
                raise ShimConfigError(f"fixture file not found: {self.fixture_path}")
        else:
            missing = [
                name
                for name, value in (
                    ("generator_model", self.generator_model),
                    ("reranker_model", self.reranker_model),
                    ("nli_model", self.nli_model),
                )
                if not value
            ]
            if missing:
                raise ShimConfigError(f"models mode requires all three model ids; missing {missing}")
        return self
