"""Segmentation sessions: one image + one snake + one optimizer, JSON-friendly.

This is the layer both the CLI and the HTTP service drive, so a service
session stepped N times reproduces a CLI run capped at N iterations exactly.
User-supplied points are treated as points the initial curve should pass
through: for the interpolating scheme they are the control points themselves,
for the approximating B-spline they are converted through the interpolation
operator.
"""

from __future__ import annotations

import numpy as np

from .energy import EnergyModel, RegionBox
from .optimize import OptimizerConfig, SnakeOptimizer
from .subdivision import (
    ControlPolygon,
    CubicBSpline,
    Scheme,
    interpolation_operator,
    scheme_from_name,
)
from .synth import fill_polygon_mask


def interpolating_polygon(points: np.ndarray, scheme: Scheme) -> ControlPolygon:
    """Control polygon whose limit curve passes through the given points."""
    polygon = ControlPolygon(np.asarray(points, dtype=np.float64), scheme)
    if isinstance(scheme, CubicBSpline):
        polygon = interpolation_operator(polygon)
    return polygon


def circle_points(center_row: float, center_col: float, radius: float, n_points: int) -> np.ndarray:
    """Evenly spaced points on a circle, counterclockwise, first point at +row."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    angles = 2.0 * np.pi * np.arange(n_points) / n_points
    return np.stack(
        [center_row + radius * np.cos(angles), center_col + radius * np.sin(angles)], axis=1
    )


class SegmentationSession:
    """Interactive segmentation of one image, driven step by step."""

    def __init__(
        self,
        intensity: np.ndarray,
        init_points: np.ndarray,
        *,
        scheme: str = "four-point",
        omega: float | None = None,
        depth: int = 4,
        box: tuple[int, int, int, int] | None = None,
        polarity: str = "dark",
        q: int | None = None,
        config: OptimizerConfig | None = None,
    ):
        scheme_obj = scheme_from_name(scheme, omega)
        region = RegionBox(*box) if box is not None else None
        self.model = EnergyModel(intensity, depth=depth, box=region, polarity=polarity, q=q)
        polygon = interpolating_polygon(init_points, scheme_obj)
        self.optimizer = SnakeOptimizer(self.model, polygon, config or OptimizerConfig())

    # --- driving -----------------------------------------------------------------

    def step(self, n: int = 1) -> dict:
        """Advance up to n iterations (stops early at a terminal status)."""
        if n < 1:
            raise ValueError(f"step count must be >= 1, got {n}")
        for _ in range(n):
            if self.optimizer.step() is None:
                break
        return self.state()

    def run(self) -> dict:
        """Iterate to a terminal status."""
        while self.optimizer.step() is not None:
            pass
        return self.state()

    def move_point(self, index: int, row: float, col: float) -> dict:
        self.optimizer.move_point(index, row, col)
        return self.state()

    def set_alpha(self, mode: str, value: float | None = None) -> dict:
        self.optimizer.set_alpha(mode, value)
        return self.state()

    # --- reporting ---------------------------------------------------------------

    def state(self) -> dict:
        """Current polygon, sampled curve, energies, and boundary pixels."""
        opt = self.optimizer
        ev = opt.evaluation
        boundary = np.stack([ev.raster.rows, ev.raster.cols, ev.raster.signs], axis=1)
        return {
            "status": opt.status,
            "iters": opt.iters,
            "alpha": opt.alpha,
            "polygon": opt.polygon.to_dict(),
            "curve": ev.sample.points.tolist(),
            "energies": {"total": ev.value, "edge": ev.e_grad, "region": ev.e_reg},
            "area": ev.area,
            "means": {"inside": ev.mean_inside, "outside": ev.mean_outside},
            "boundary": boundary.tolist(),
            "trace_length": len(opt.trace),
        }

    @property
    def trace(self) -> list[dict]:
        return self.optimizer.trace

    @property
    def status(self) -> str:
        return self.optimizer.status

    def result_mask(self) -> np.ndarray:
        """Even-odd fill of the current boundary at the session's depth."""
        return fill_polygon_mask(self.optimizer.evaluation.sample.points, self.model.shape)
