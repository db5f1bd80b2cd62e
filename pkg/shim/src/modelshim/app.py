"""FastAPI application exposing the five wire endpoints plus /healthz."""

from __future__ import annotations

import logging

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .backends import build_backend
from .config import ShimConfig, ShimStartupError
from .determinism import UnknownPromptError

logger = logging.getLogger(__name__)


class GenerateRequest(BaseModel):
    prompt: str
    max_tokens: int = Field(default=256, ge=1)
    temperature: float = 0.0


class GenerateFusedRequest(BaseModel):
    segments: list[str]
    max_tokens: int = Field(default=256, ge=1)


class PairsRequest(BaseModel):
    pairs: list[list[str]]


class SearchRequest(BaseModel):
    query: str
    top_k: int = Field(default=5, ge=1)


def create_app(config: ShimConfig) -> FastAPI:
    backend = build_backend(config)
    if hasattr(backend, "warm"):
        backend.warm()  # models mode fails at startup, naming the endpoint
    app = FastAPI(title="modelshim", version="0.1.0")

    def as_pairs(request: PairsRequest) -> list[tuple[str, str]]:
        if not request.pairs:
            raise HTTPException(status_code=400, detail="pairs must be non-empty")
        out = []
        for i, pair in enumerate(request.pairs):
            if len(pair) != 2:
                raise HTTPException(status_code=400, detail=f"pair {i} must hold exactly two strings")
            out.append((pair[0], pair[1]))
        return out

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "mode": config.mode}

    @app.post("/generate")
    def generate(request: GenerateRequest):
        if not request.prompt:
            raise HTTPException(status_code=400, detail="prompt must be non-empty")
        try:
            text = backend.generate(request.prompt, request.max_tokens, request.temperature)
        except UnknownPromptError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ShimStartupError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        return {"text": text}

    @app.post("/generate_fused")
    def generate_fused(request: GenerateFusedRequest):
        if not request.segments:
            raise HTTPException(status_code=400, detail="segments must be non-empty")
        try:
            text = backend.generate_fused(request.segments, request.max_tokens)
        except UnknownPromptError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ShimStartupError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        return {"text": text}

    @app.post("/score")
    def score(request: PairsRequest):
        pairs = as_pairs(request)
        try:
            scores = backend.score(pairs)
        except ShimStartupError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        assert len(scores) == len(pairs)  # response length is the request length
        return {"scores": scores}

    @app.post("/nli")
    def nli(request: PairsRequest):
        pairs = as_pairs(request)
        try:
            scores = backend.nli(pairs)
        except ShimStartupError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        assert len(scores) == len(pairs)
        return {"scores": scores}

    @app.post("/search")
    def search(request: SearchRequest):
        try:
            results = backend.search(request.query, request.top_k)
        except ShimStartupError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        return {"results": results}

    return app


def serve(config: ShimConfig) -> None:
    """Validate config eagerly, then run the server."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host="0.0.0.0", port=config.port)
