"""Snake energies and their analytic gradients with respect to control points.

Two terms are blended by a weight ``alpha`` in [0, 1]:

* gradient energy -- the average over the fine curve samples of
  ``Iy * tx - Ix * ty``: it aligns the curve's travel direction with the image
  gradient so that, for a counterclockwise snake, dark-object boundaries give
  strongly negative values (direction-sensitive, unlike edge magnitude).
* region energy -- ``-(A - B)**2`` where A is the mean intensity inside the
  snake and B the mean intensity of the rest of a fixed bounding box: maximal
  contrast between inside and outside is the minimum.

Both consume one shared curve sample per evaluation; the region term also
shares one boundary rasterization between its value and its gradient.  All
gradients are exact derivatives of the evaluated expressions except that the
region term differentiates the smooth contour integrals behind the strip sums
(the strip sums themselves are piecewise constant in the control points).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import (
    bilinear_sample,
    box_sum,
    build_row_prefix,
    compute_derivative_fields,
    default_filter_halfwidth,
)
from .raster import BoundaryRaster, DegenerateRegionError, rasterize_snake, region_integrals
from .subdivision import (
    ControlPolygon,
    CurveSample,
    build_basic_table,
    evaluate_curve,
    evaluation_weights,
)

#: snakes enclosing fewer pixels than this are treated as collapsed
MIN_REGION_AREA = 4.0


@dataclass(frozen=True)
class RegionBox:
    """Fixed 1-based inclusive pixel rectangle containing object and snake."""

    r0: int
    r1: int
    c0: int
    c1: int

    def __post_init__(self):
        if not (self.r0 <= self.r1 and self.c0 <= self.c1):
            raise ValueError(f"empty region box {self}")

    @property
    def area(self) -> float:
        return float((self.r1 - self.r0 + 1) * (self.c1 - self.c0 + 1))

    @staticmethod
    def whole_image(shape: tuple[int, int]) -> "RegionBox":
        return RegionBox(1, shape[0], 1, shape[1])

    def contains_points(self, pts: np.ndarray) -> bool:
        x, y = pts[:, 0], pts[:, 1]
        return bool(
            (x >= self.r0 - 1).all()
            and (x <= self.r1).all()
            and (y >= self.c0 - 1).all()
            and (y <= self.c1).all()
        )


@dataclass(frozen=True)
class EnergyEval:
    """Total energy with its gradient, plus the parts for tracing.

    ``grad`` is interleaved (d/dx_0, d/dy_0, d/dx_1, d/dy_1, ...).
    """

    value: float
    grad: np.ndarray
    e_grad: float
    e_reg: float
    area: float
    mean_inside: float
    mean_outside: float
    sample: CurveSample
    raster: BoundaryRaster


def gradient_energy(sample: CurveSample, fields) -> float:
    """Average of Iy*tx - Ix*ty over the fine samples (bilinear field lookups)."""
    x, y = sample.points[:, 0], sample.points[:, 1]
    tx, ty = sample.tangents[:, 0], sample.tangents[:, 1]
    ix_at = bilinear_sample(fields.ix, x, y)
    iy_at = bilinear_sample(fields.iy, x, y)
    return float(np.mean(iy_at * tx - ix_at * ty))


class EnergyModel:
    """Energy evaluator bound to one image, box, polarity, and sampling depth.

    Immutable after construction; evaluations are pure functions of the
    polygon and alpha, so one model can serve many snakes.
    """

    def __init__(
        self,
        intensity: np.ndarray,
        *,
        depth: int = 4,
        box: RegionBox | None = None,
        polarity: str = "dark",
        q: int | None = None,
    ):
        img = np.asarray(intensity, dtype=np.float64)
        if img.ndim != 2:
            raise ValueError(f"expected a 2-D grayscale array, got shape {img.shape}")
        if polarity not in ("dark", "bright"):
            raise ValueError(f"polarity must be 'dark' or 'bright', got {polarity!r}")
        if polarity == "bright":
            # flip so the bright object becomes the dark one; every formula
            # below then targets dark objects on bright backgrounds
            img = 255.0 - img
        img.setflags(write=False)
        self.intensity = img
        self.shape = img.shape
        self.depth = int(depth)
        self.polarity = polarity
        self.q = q if q is not None else default_filter_halfwidth(*img.shape)
        self.fields = compute_derivative_fields(img, self.q)
        self.prefix = build_row_prefix(img)
        self.box = box if box is not None else RegionBox.whole_image(img.shape)
        if not (
            1 <= self.box.r0
            and self.box.r1 <= img.shape[0]
            and 1 <= self.box.c0
            and self.box.c1 <= img.shape[1]
        ):
            raise ValueError(f"region box {self.box} outside a {img.shape} image")
        self.box_intensity = box_sum(self.prefix, self.box.r0, self.box.r1, self.box.c0, self.box.c1)
        self.box_area = self.box.area
        # the attainable range of any true region mean; a mean outside this
        # range can only come from a self-overlapping boundary
        self.intensity_low = float(img.min())
        self.intensity_high = float(img.max())

    def evaluate(self, polygon: ControlPolygon, alpha: float) -> EnergyEval:
        """Total energy and exact gradient at a control polygon.

        Raises DegenerateRegionError when the snake's enclosed area collapses
        or (almost) fills the whole box, which leaves the contrast undefined.
        """
        if not (0.0 <= alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        table = build_basic_table(polygon.scheme, self.depth)
        sample = evaluate_curve(polygon, table)
        w, wd = evaluation_weights(polygon.scheme, self.depth, len(polygon))
        x, y = sample.points[:, 0], sample.points[:, 1]
        tx, ty = sample.tangents[:, 0], sample.tangents[:, 1]
        n = float(len(x))

        ix_at = bilinear_sample(self.fields.ix, x, y)
        iy_at = bilinear_sample(self.fields.iy, x, y)
        e_grad = float(np.mean(iy_at * tx - ix_at * ty))

        ixx_at = bilinear_sample(self.fields.ixx, x, y)
        ixy_at = bilinear_sample(self.fields.ixy, x, y)
        iyy_at = bilinear_sample(self.fields.iyy, x, y)
        ggx = ((ixy_at * tx - ixx_at * ty) @ w + iy_at @ wd) / n
        ggy = ((iyy_at * tx - ixy_at * ty) @ w - ix_at @ wd) / n

        raster = rasterize_snake(sample.points, self.shape)
        i_omega, area = region_integrals(raster, self.prefix)
        outside_area = self.box_area - area
        if area <= MIN_REGION_AREA or outside_area <= MIN_REGION_AREA:
            raise DegenerateRegionError(
                f"snake area {area:.1f} px leaves no usable inside/outside split "
                f"of the {self.box_area:.0f} px box"
            )
        mean_in = i_omega / area
        mean_out = (self.box_intensity - i_omega) / outside_area
        d = mean_in - mean_out
        e_reg = -(d * d)

        g = i_omega / area**2 + (self.box_intensity - i_omega) / outside_area**2
        h = 1.0 / area + 1.0 / outside_area
        i_at = bilinear_sample(self.intensity, x, y)
        coef = g - h * i_at
        scale = d / float(2 ** (self.depth - 1))
        rgx = scale * ((coef * ty) @ w)
        rgy = -scale * ((coef * tx) @ w)

        grad = np.empty((len(polygon), 2), dtype=np.float64)
        grad[:, 0] = alpha * ggx + (1.0 - alpha) * rgx
        grad[:, 1] = alpha * ggy + (1.0 - alpha) * rgy

        return EnergyEval(
            value=alpha * e_grad + (1.0 - alpha) * e_reg,
            grad=grad.ravel(),
            e_grad=e_grad,
            e_reg=e_reg,
            area=area,
            mean_inside=mean_in,
            mean_outside=mean_out,
            sample=sample,
            raster=raster,
        )

    def region_means(self, polygon: ControlPolygon) -> tuple[float, float]:
        """(mean inside, mean outside-within-box) intensity for diagnostics."""
        table = build_basic_table(polygon.scheme, self.depth)
        sample = evaluate_curve(polygon, table)
        raster = rasterize_snake(sample.points, self.shape)
        i_omega, area = region_integrals(raster, self.prefix)
        outside_area = self.box_area - area
        if area <= 0 or outside_area <= 0:
            raise DegenerateRegionError("no inside/outside split")
        return i_omega / area, (self.box_intensity - i_omega) / outside_area
