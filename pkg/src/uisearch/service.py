"""Read-only HTTP query service over a trained model and frozen index.

Weights, index and corpus are loaded once at startup and never mutated, so
any number of concurrent requests can share them without locking. Retraining
or reindexing happens offline through the CLI, followed by a restart.

Endpoints:

    GET  /health        -> {"status": "ok", "index_size": n, "dim": d, "m": m}
    POST /query?k=K     -> {"results": [{"id", "distance", "layout", "category"}]}
    GET  /layouts/{id}  -> layout JSON or 404
    GET  /palette       -> class -> color table for client rendering

Query bodies use the detections JSON schema (confidences optional). Oversized
bodies (over 256 KiB) get 413, malformed JSON or unknown class names 400,
degenerate layouts 422, and every endpoint answers 503 until startup
finishes loading.
"""

from __future__ import annotations

import json
import logging
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import (
    DegenerateBox,
    EmptyCanvas,
    MalformedJson,
    UISearchError,
    UnknownClass,
)
from .index import load_index, query
from .net import embed
from .raster import DEFAULT_PALETTE
from .voc import layout_from_detections_dict, layout_to_dict, load_corpus
from .weights import load_weights

log = logging.getLogger(__name__)

MAX_BODY_BYTES = 256 * 1024


@dataclass
class ServiceConfig:
    weights_path: str
    index_path: str
    data_dir: str
    host: str = "127.0.0.1"
    port: int = 8000
    default_k: int = 10
    max_k: int = 50
    cors_origins: tuple[str, ...] = ("*",)

    def __post_init__(self):
        if self.default_k < 1 or self.max_k < 1:
            raise ValueError("default_k and max_k must be positive")


@dataclass
class _ServiceState:
    ready: bool = False
    model: object = None
    labelnet: object = None
    index: object = None
    layouts: dict = field(default_factory=dict)


def create_app(config: ServiceConfig) -> FastAPI:
    state = _ServiceState()

    @asynccontextmanager
    async def _lifespan(app: FastAPI):
        weights = load_weights(config.weights_path)
        state.model, state.labelnet = weights.build_models()
        state.index = load_index(config.index_path)
        if state.index.dim != weights.config.embedding_dim:
            raise UISearchError(
                f"index dim {state.index.dim} != model embedding dim "
                f"{weights.config.embedding_dim}"
            )
        corpus = load_corpus(config.data_dir)
        state.layouts = corpus.by_id()
        state.ready = True
        log.info(
            "event=startup index_size=%d dim=%d m=%d",
            len(state.index), state.index.dim, state.model.config.m,
        )
        yield

    app = FastAPI(title="uisearch", docs_url=None, redoc_url=None, lifespan=_lifespan)
    app.state.service = state

    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def _gate(request: Request, call_next):
        if not state.ready:
            return JSONResponse({"error": "service is starting"}, status_code=503)
        return await call_next(request)

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "index_size": len(state.index),
            "dim": state.index.dim,
            "m": state.model.config.m,
        }

    @app.get("/palette")
    def palette() -> dict:
        return DEFAULT_PALETTE.as_dict()

    @app.get("/layouts/{layout_id}")
    def get_layout(layout_id: str):
        layout = state.layouts.get(layout_id)
        if layout is None:
            return JSONResponse({"error": f"no layout {layout_id!r}"}, status_code=404)
        return layout_to_dict(layout)

    @app.post("/query")
    async def run_query(request: Request, k: int | None = None):
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return JSONResponse(
                {"error": f"request body exceeds {MAX_BODY_BYTES} bytes"},
                status_code=413,
            )
        try:
            doc = json.loads(body)
        except ValueError as e:
            return JSONResponse({"error": f"malformed JSON: {e}"}, status_code=400)
        try:
            layout = layout_from_detections_dict(doc)
        except (MalformedJson, UnknownClass) as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        except (DegenerateBox, EmptyCanvas) as e:
            return JSONResponse({"error": str(e)}, status_code=422)

        k_eff = config.default_k if k is None else k
        k_eff = max(1, min(k_eff, config.max_k))
        z = embed(state.model, state.labelnet, layout)
        result = query(state.index, z, k_eff)
        results = []
        for lid, dist in result.entries:
            hit = state.layouts.get(lid)
            results.append(
                {
                    "id": lid,
                    "distance": dist,
                    "layout": layout_to_dict(hit) if hit is not None else None,
                    "category": hit.category if hit is not None else None,
                }
            )
        log.info("event=query k=%d results=%d", k_eff, len(results))
        return {"results": results}

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="warning")
