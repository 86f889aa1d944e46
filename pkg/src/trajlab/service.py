"""HTTP probe service: cases, predictions with manual neighbors, attention.

JSON over HTTP/1.1.  ``/predict`` is pure given the loaded checkpoint and
the request body; checkpoint swaps are atomic (in-flight requests keep the
snapshot they started with).
"""

from __future__ import annotations

import threading
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .checkpoint import CheckpointError, load_checkpoint
from .probe import run_probe
from .social import ConfigError


class ManualNeighborSpec(BaseModel):
    start: list[float] = Field(min_length=2, max_length=2)
    end: list[float] = Field(min_length=2, max_length=2)


class PredictRequest(BaseModel):
    case_id: str
    manual_neighbors: list[ManualNeighborSpec] = Field(default_factory=list)
    k: int = Field(default=1, ge=1)
    seed: int = 0
    n_partitions: Optional[int] = None
    factors: Optional[str] = None


class LoadModelRequest(BaseModel):
    path: str


class ModelRegistry:
    """Holds the current (params, config, checksum, path) snapshot."""

    def __init__(self):
        self._snapshot = None
        self._lock = threading.Lock()

    def load(self, path: str):
        params, config, meta = load_checkpoint(path)
        with self._lock:
            self._snapshot = (params, config, meta["checksum"], str(path))
        return meta

    def snapshot(self):
        return self._snapshot


def create_app(cases: dict, registry: ModelRegistry | None = None) -> FastAPI:
    """Build the app over a {case_id: PredictionCase} map (scene frame)."""
    registry = registry or ModelRegistry()
    app = FastAPI(title="trajlab probe service")
    app.state.registry = registry
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    scenes: dict = {}
    for case_id, case in cases.items():
        scenes.setdefault(case.scene_id, []).append(case_id)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": list(err.get("loc", ())), "msg": err.get("msg", "invalid")}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    def error(status: int, loc, msg: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"detail": [{"loc": loc, "msg": msg}]})

    @app.get("/scenes")
    def get_scenes():
        return {
            "scenes": [
                {"scene_id": scene_id, "case_ids": ids} for scene_id, ids in sorted(scenes.items())
            ]
        }

    @app.get("/cases/{case_id:path}")
    def get_case(case_id: str):
        case = cases.get(case_id)
        if case is None:
            return error(404, ["path", "case_id"], f"unknown case {case_id!r}")
        return {
            "case_id": case.case_id,
            "scene_id": case.scene_id,
            "unit": case.unit_tag,
            "t_h": case.t_h,
            "t_f": case.t_f,
            "observed": case.target_observed.tolist(),
            "future": None if case.target_future is None else case.target_future.tolist(),
            "neighbors": [
                {"id": nid, "tag": tag, "points": pts.tolist()}
                for nid, tag, pts in zip(case.neighbor_ids, case.neighbor_tags, case.neighbors)
            ],
        }

    @app.get("/model")
    def get_model():
        snap = registry.snapshot()
        if snap is None:
            return {"loaded": False}
        _, config, checksum, path = snap
        return {"loaded": True, "checksum": checksum, "path": path, "config": config.to_dict()}

    @app.post("/model/load")
    def load_model(body: LoadModelRequest):
        try:
            registry.load(body.path)
        except CheckpointError as exc:
            return error(400, ["body", "path"], str(exc))
        except FileNotFoundError:
            return error(400, ["body", "path"], f"no such file: {body.path}")
        snap = registry.snapshot()
        _, config, checksum, path = snap
        return {"loaded": True, "checksum": checksum, "path": path, "config": config.to_dict()}

    @app.post("/predict")
    def predict(body: PredictRequest):
        snap = registry.snapshot()
        if snap is None:
            return error(409, ["body"], "no model loaded; POST /model/load first")
        params, config, checksum, _ = snap
        case = cases.get(body.case_id)
        if case is None:
            return error(404, ["body", "case_id"], f"unknown case {body.case_id!r}")
        try:
            result = run_probe(
                case,
                params,
                config,
                manual_neighbors=[(m.start, m.end) for m in body.manual_neighbors],
                K=body.k,
                seed=body.seed,
                n_partitions=body.n_partitions,
                factor_codes=body.factors,
            )
        except ConfigError as exc:
            return error(400, ["body"], str(exc))
        result["checkpoint_checksum"] = checksum
        return result

    return app


def cases_by_id(case_list) -> dict:
    return {case.case_id: case for case in case_list}
