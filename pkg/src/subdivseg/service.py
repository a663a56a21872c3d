"""HTTP session service for interactive segmentation.

Thin wrapper over SegmentationSession: every endpoint validates JSON, takes
the per-session lock, drives the engine, and returns the committed state.
Geometry is exchanged as (row, col) pixel coordinates in plain JSON numbers.

Engine errors map to HTTP statuses: unknown session 404, invalid input 400,
degenerate region geometry 409.
"""

from __future__ import annotations

import base64
import threading
import uuid
from contextlib import contextmanager
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from .imaging import load_grayscale, load_grayscale_bytes
from .optimize import OptimizerConfig
from .raster import DegenerateRegionError
from .sessions import SegmentationSession, circle_points


class AlphaSpec(BaseModel):
    mode: Literal["two-phase", "fixed"] = "two-phase"
    value: float | None = Field(None, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _fixed_needs_value(self):
        if self.mode == "fixed" and self.value is None:
            raise ValueError("fixed blend mode requires a value in [0, 1]")
        return self


class CircleSpec(BaseModel):
    center_row: float
    center_col: float
    radius: float = Field(gt=0.0)
    n_points: int = Field(12, ge=3, le=256)


class OptimizerSpec(BaseModel):
    max_iters: int = Field(200, ge=1)
    grad_tol: float = Field(1e-4, gt=0.0)
    step_tol: float = Field(1e-3, gt=0.0)
    stabilization_window: int = Field(5, ge=1)
    memory: int = Field(10, ge=1)
    alpha_start: float = Field(0.1, ge=0.0, le=1.0)
    alpha_final: float = Field(0.9, ge=0.0, le=1.0)


class CreateSessionRequest(BaseModel):
    image_path: str | None = None
    image_base64: str | None = None
    scheme: Literal["four-point", "cubic-bspline"] = "four-point"
    omega: float | None = None
    points: list[list[float]] | None = None
    circle: CircleSpec | None = None
    alpha: AlphaSpec = AlphaSpec()
    depth: int = Field(4, ge=1, le=8)
    box: list[int] | None = Field(None, min_length=4, max_length=4)
    polarity: Literal["dark", "bright"] = "dark"
    q: int | None = Field(None, ge=1)
    optimizer: OptimizerSpec = OptimizerSpec()

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.image_path is None) == (self.image_base64 is None):
            raise ValueError("provide exactly one of image_path or image_base64")
        if (self.points is None) == (self.circle is None):
            raise ValueError("provide exactly one of points or circle")
        if self.points is not None and any(len(p) != 2 for p in self.points):
            raise ValueError("points must be [row, col] pairs")
        return self


class StepRequest(BaseModel):
    n: int = Field(1, ge=1, le=10000)


class MovePointRequest(BaseModel):
    index: int = Field(ge=0)
    row: float
    col: float


def _optimizer_config(alpha: AlphaSpec, opt: OptimizerSpec) -> OptimizerConfig:
    return OptimizerConfig(
        alpha_mode=alpha.mode,
        alpha_fixed=alpha.value if alpha.value is not None else 0.5,
        alpha_start=opt.alpha_start,
        alpha_final=opt.alpha_final,
        max_iters=opt.max_iters,
        grad_tol=opt.grad_tol,
        step_tol=opt.step_tol,
        stabilization_window=opt.stabilization_window,
        memory=opt.memory,
    )


@contextmanager
def _engine_errors():
    """Translate engine exceptions to HTTP statuses."""
    try:
        yield
    except DegenerateRegionError as exc:
        raise HTTPException(status_code=409, detail=str(exc)) from exc
    except (ValueError, IndexError, IOError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


class _SessionBox:
    """A session plus the lock serializing its mutations."""

    def __init__(self, session: SegmentationSession):
        self.session = session
        self.lock = threading.Lock()


def create_app() -> FastAPI:
    app = FastAPI(title="subdivseg", version="0.1.0")
    store: dict[str, _SessionBox] = {}
    store_lock = threading.Lock()

    def _get(session_id: str) -> _SessionBox:
        with store_lock:
            box = store.get(session_id)
        if box is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return box

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        with _engine_errors():
            if req.image_path is not None:
                intensity = load_grayscale(req.image_path)
            else:
                try:
                    raw = base64.b64decode(req.image_base64, validate=True)
                except Exception as exc:
                    raise HTTPException(status_code=400, detail=f"bad base64 image: {exc}") from exc
                intensity = load_grayscale_bytes(raw)
            if req.points is not None:
                init = np.asarray(req.points, dtype=np.float64)
            else:
                c = req.circle
                init = circle_points(c.center_row, c.center_col, c.radius, c.n_points)
            session = SegmentationSession(
                intensity,
                init,
                scheme=req.scheme,
                omega=req.omega,
                depth=req.depth,
                box=tuple(req.box) if req.box is not None else None,
                polarity=req.polarity,
                q=req.q,
                config=_optimizer_config(req.alpha, req.optimizer),
            )
        session_id = uuid.uuid4().hex
        with store_lock:
            store[session_id] = _SessionBox(session)
        rows, cols = session.model.shape
        return {"id": session_id, "rows": rows, "cols": cols}

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str):
        box = _get(session_id)
        with box.lock:
            return box.session.state()

    @app.post("/sessions/{session_id}/step")
    def step(session_id: str, req: StepRequest):
        box = _get(session_id)
        with box.lock, _engine_errors():
            return box.session.step(req.n)

    @app.patch("/sessions/{session_id}/points")
    def move_point(session_id: str, req: MovePointRequest):
        box = _get(session_id)
        with box.lock, _engine_errors():
            return box.session.move_point(req.index, req.row, req.col)

    @app.post("/sessions/{session_id}/alpha")
    def set_alpha(session_id: str, req: AlphaSpec):
        box = _get(session_id)
        with box.lock, _engine_errors():
            return box.session.set_alpha(req.mode, req.value)

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        box = _get(session_id)
        with box.lock:
            return {"trace": box.session.trace}

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        with store_lock:
            if store.pop(session_id, None) is None:
                raise HTTPException(status_code=404, detail=f"no session {session_id}")

    return app


app = create_app()
