"""Read-only HTTP API over a loaded checkpoint and dataset.

All endpoints are stateless reads against immutable state; each generation
request owns its own generator stream (request seed, or fresh entropy when
the request omits one). Validation failures return 400 with field-level
messages; lookups of unknown samples return 404; every endpoint returns 503
until the model finishes loading.
"""

from __future__ import annotations

import secrets
import time
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .checkpoint import CHECKPOINT_VERSION, load_checkpoint
from .cluvae import TrainedBundle, generate, make_condition
from .errors import LandgenError
from .evaluation import held_out_split
from .grid_data import LEVEL_COUNT, DatasetSample, load_dataset
from .rng import Rng

GENERATION_COUNT_LIMIT = 64


@dataclass
class ServiceStore:
    bundle: TrainedBundle
    samples_by_id: dict[int, DatasetSample]
    test_samples: list[DatasetSample]
    metrics: dict | None


class ContextRef(BaseModel):
    sample_id: int | None = None
    features: list[list[float]] | None = None


class GenerationRequest(BaseModel):
    green_level: int = Field(ge=0, lt=LEVEL_COUNT)
    context: ContextRef
    count: int = Field(default=1, ge=1, le=GENERATION_COUNT_LIMIT)
    seed: int | None = None
    round: bool = False


def _error(status: int, kind: str, message: str, fields: list[dict] | None = None) -> JSONResponse:
    body: dict = {"error": kind, "message": message}
    if fields is not None:
        body["fields"] = fields
    return JSONResponse(status_code=status, content=body)


def build_store(checkpoint_path, dataset_path, metrics_path=None) -> ServiceStore:
    bundle = load_checkpoint(checkpoint_path)
    samples = load_dataset(dataset_path) if dataset_path else []
    test_samples = (
        held_out_split(samples, bundle.training["split_seed"]) if samples else []
    )
    metrics = None
    if metrics_path:
        import json

        with open(metrics_path, "r", encoding="utf-8") as fh:
            metrics = json.load(fh)
    return ServiceStore(
        bundle=bundle,
        samples_by_id={s.sample_id: s for s in samples},
        test_samples=test_samples,
        metrics=metrics,
    )


def create_app(store: ServiceStore | None = None, ui_dir=None) -> FastAPI:
    app = FastAPI(title="landgen", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        fields = [
            {"field": ".".join(str(p) for p in err["loc"] if p != "body"), "message": err["msg"]}
            for err in exc.errors()
        ]
        return _error(400, "validation", "request validation failed", fields)

    def current_store() -> ServiceStore | None:
        return app.state.store

    @app.get("/api/health")
    def health():
        store = current_store()
        if store is None:
            return _error(503, "loading", "model is not loaded yet")
        return {
            "status": "ok",
            "model_version": CHECKPOINT_VERSION,
            "variant": store.bundle.variant,
        }

    @app.get("/api/meta")
    def meta():
        store = current_store()
        if store is None:
            return _error(503, "loading", "model is not loaded yet")
        dims = store.bundle.dims
        per_level = {str(j): 0 for j in range(LEVEL_COUNT)}
        for sample in store.test_samples:
            per_level[str(sample.green_level.level)] += 1
        return {
            "variant": store.bundle.variant,
            "lambda": store.bundle.lam,
            "levels": LEVEL_COUNT,
            "dims": {
                "n": dims.n,
                "m": dims.m,
                "z": dims.z,
                "d": dims.d,
                "latent": dims.latent,
                "hidden": dims.hidden,
                "t": dims.t,
            },
            "dataset": {"test_count": len(store.test_samples), "per_level": per_level},
        }

    @app.get("/api/samples")
    def samples(level: int, limit: int = 8):
        store = current_store()
        if store is None:
            return _error(503, "loading", "model is not loaded yet")
        if not 0 <= level < LEVEL_COUNT:
            return _error(
                400, "validation", "request validation failed",
                [{"field": "level", "message": f"must be in [0, {LEVEL_COUNT})"}],
            )
        if limit < 1:
            return _error(
                400, "validation", "request validation failed",
                [{"field": "limit", "message": "must be >= 1"}],
            )
        rows = [
            {
                "id": s.sample_id,
                "level": s.green_level.level,
                "config": s.configuration.grid.tolist(),
                "zones": s.zones.labels.tolist(),
            }
            for s in store.test_samples
            if s.green_level.level == level
        ][:limit]
        return {"samples": rows}

    @app.post("/api/generate")
    def generate_endpoint(req: GenerationRequest):
        store = current_store()
        if store is None:
            return _error(503, "loading", "model is not loaded yet")
        bundle = store.bundle
        started = time.perf_counter()

        if req.context.sample_id is not None:
            sample = store.samples_by_id.get(req.context.sample_id)
            if sample is None:
                return _error(404, "not_found", f"unknown sample id {req.context.sample_id}")
            raw_features = sample.context.features
        elif req.context.features is not None:
            raw_features = np.asarray(req.context.features, dtype=np.float64)
            expected = (8, bundle.scaler.mean.size)
            if raw_features.shape != expected:
                return _error(
                    400, "validation", "request validation failed",
                    [{"field": "context.features", "message": f"expected shape {list(expected)}"}],
                )
        else:
            return _error(
                400, "validation", "request validation failed",
                [{"field": "context", "message": "provide sample_id or features"}],
            )

        try:
            s_vec = bundle.embed_features(raw_features)
            cond = make_condition(s_vec, req.green_level, bundle.variant).c
            seed = req.seed if req.seed is not None else secrets.randbits(63)
            rng = Rng(seed, 0)
            configs = generate(bundle, cond, rng, count=req.count)
        except LandgenError as exc:
            return _error(400, "validation", str(exc))

        grids = []
        totals = []
        for cfg in configs:
            grid = cfg.grid
            if req.round:
                grid = np.maximum(np.rint(grid), 0.0)
            grids.append(grid.tolist())
            totals.append(grid.sum(axis=(0, 1)).tolist())
        return {
            "configurations": grids,
            "per_category_totals": totals,
            "latency_ms": (time.perf_counter() - started) * 1000.0,
            "seed": seed,
        }

    @app.get("/api/metrics")
    def metrics():
        store = current_store()
        if store is None:
            return _error(503, "loading", "model is not loaded yet")
        if store.metrics is None:
            return _error(404, "not_found", "no metric report loaded")
        return store.metrics

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
