"""Request backends: deterministic fixtures or small open models."""

from __future__ import annotations

import json
import logging
from pathlib import Path

from . import determinism
from .config import ShimConfig, ShimStartupError

logger = logging.getLogger(__name__)


class FixtureBackend:
    """Byte-compatible reimplementation of the pipeline's offline mocks."""

    def __init__(self, fixture_path: str | Path):
        self.search_records: list[dict] = []
        self.edit_records: list[tuple[str, str]] = []
        for line in Path(fixture_path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            if "query_substring" in obj:
                self.search_records.append(obj)
            elif "claim_substring" in obj:
                self.edit_records.append((obj["claim_substring"], obj["revision"]))
            else:
                raise ValueError(f"unrecognized fixture line: {line[:80]}")

    def generate(self, prompt: str, max_tokens: int, temperature: float) -> str:
        return determinism.fixture_generate(prompt)

    def generate_fused(self, segments: list[str], max_tokens: int) -> str:
        claim = determinism.extract_claim(segments[0])
        for substring, revision in self.edit_records:
            if substring in claim:
                return revision
        return claim

    def score(self, pairs: list[tuple[str, str]]) -> list[float]:
        return [determinism.score_pair(q, p) for q, p in pairs]

    def nli(self, pairs: list[tuple[str, str]]) -> list[float]:
        return [min(max(determinism.nli_pair(p, h), 0.0), 1.0) for p, h in pairs]

    def search(self, query: str, top_k: int) -> list[dict]:
        for record in self.search_records:
            if record["query_substring"] in query:
                return [
                    {"url": p.get("url", ""), "title": p.get("title", ""), "text": p.get("text", "")}
                    for p in record["pages"][:top_k]
                ]
        return []


class ModelBackend:
    """Transformers-backed endpoints, loaded lazily and serialized per device.

    Fused generation conditions jointly on all segments by concatenating
    them into one encoder input; the wire contract leaves the fusion
    mechanics to the server, and this is the simplest faithful choice for
    a stock seq2seq checkpoint.
    """

    def __init__(self, config: ShimConfig):
        self.config = config
        self._generator = None
        self._reranker = None
        self._nli = None
        self.search_backend = FixtureBackend(config.fixture_path) if config.fixture_path else None

    def warm(self) -> None:
        """Load every model up front; raises naming the failing endpoint."""
        self._load_seq2seq()
        if self._reranker is None:
            self._reranker = self._load_cross_encoder(self.config.reranker_model, "/score")
        if self._nli is None:
            self._nli = self._load_cross_encoder(self.config.nli_model, "/nli")

    def _load_seq2seq(self):
        if self._generator is None:
            try:
                import torch  # noqa: F401
                from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

                tokenizer = AutoTokenizer.from_pretrained(self.config.generator_model)
                model = AutoModelForSeq2SeqLM.from_pretrained(self.config.generator_model).to(self.config.device)
                self._generator = (tokenizer, model)
            except Exception as exc:
                raise ShimStartupError(f"/generate: failed to load {self.config.generator_model!r}: {exc}") from exc
        return self._generator

    def _load_cross_encoder(self, model_id: str, endpoint: str):
        try:
            import torch  # noqa: F401
            from transformers import AutoModelForSequenceClassification, AutoTokenizer

            tokenizer = AutoTokenizer.from_pretrained(model_id)
            model = AutoModelForSequenceClassification.from_pretrained(model_id).to(self.config.device)
            return tokenizer, model
        except Exception as exc:
            raise ShimStartupError(f"{endpoint}: failed to load {model_id!r}: {exc}") from exc

    def _generate_text(self, text: str, max_tokens: int) -> str:
        import torch

        tokenizer, model = self._load_seq2seq()
        inputs = tokenizer(text, return_tensors="pt", truncation=True, max_length=1024).to(self.config.device)
        with torch.no_grad():
            output = model.generate(**inputs, max_new_tokens=max_tokens, do_sample=False)
        return tokenizer.decode(output[0], skip_special_tokens=True)

    def generate(self, prompt: str, max_tokens: int, temperature: float) -> str:
        return self._generate_text(prompt, max_tokens)

    def generate_fused(self, segments: list[str], max_tokens: int) -> str:
        return self._generate_text("\n".join(segments), max_tokens)

    def _pair_logits(self, pairs: list[tuple[str, str]], which: str) -> list[list[float]]:
        import torch

        if which == "score":
            if self._reranker is None:
                self._reranker = self._load_cross_encoder(self.config.reranker_model, "/score")
            tokenizer, model = self._reranker
        else:
            if self._nli is None:
                self._nli = self._load_cross_encoder(self.config.nli_model, "/nli")
            tokenizer, model = self._nli
        firsts = [a for a, _ in pairs]
        seconds = [b for _, b in pairs]
        inputs = tokenizer(firsts, seconds, return_tensors="pt", truncation=True, padding=True).to(self.config.device)
        with torch.no_grad():
            logits = model(**inputs).logits
        return logits.tolist()

    def score(self, pairs: list[tuple[str, str]]) -> list[float]:
        return [row[0] if isinstance(row, list) else float(row) for row in self._pair_logits(pairs, "score")]

    def nli(self, pairs: list[tuple[str, str]]) -> list[float]:
        import torch

        logits = self._pair_logits(pairs, "nli")
        scores = []
        for row in logits:
            if isinstance(row, list) and len(row) > 1:
                probs = torch.softmax(torch.tensor(row), dim=-1).tolist()
                # entailment-class probability; the first class by convention
                # of the default checkpoint (contradiction/entailment/neutral)
                scores.append(probs[1] if len(probs) == 3 else probs[-1])
            else:
                value = row[0] if isinstance(row, list) else float(row)
                scores.append(1.0 / (1.0 + pow(2.718281828459045, -value)))
        return [min(max(s, 0.0), 1.0) for s in scores]

    def search(self, query: str, top_k: int) -> list[dict]:
        if self.search_backend is None:
            raise ShimStartupError("/search: models mode needs a fixture path to serve search")
        return self.search_backend.search(query, top_k)


def build_backend(config: ShimConfig):
    config.validate()
    if config.mode == "fixtures":
        return FixtureBackend(config.fixture_path)
    return ModelBackend(config)
