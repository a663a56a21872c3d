"""Scanline conversion of the fine snake polygon into signed boundary strips.

The region integrals of the contrast energy (total intensity inside the snake
and enclosed pixel area) are evaluated as signed sums of horizontal strips:
each non-horizontal polygon edge selects one boundary pixel (j, l) per image
row j it is responsible for, and contributes the row's prefix sum up to column
l with the sign of its travel direction.  For a counterclockwise snake (in the
(row, col)-as-(x, y) frame) the signed sums are positive: edges moving to
larger rows run along the smaller-column side of the region and subtract,
edges moving to smaller rows run along the larger-column side and add.

Each boundary row-line crossing is assigned to exactly one edge: an edge owns
the pixel rows from its first endpoint's row up to but excluding its second
endpoint's row, which the following edge owns.  Edges that stay within one
pixel row contribute nothing (their neighbors describe the boundary there).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateRegionError(RuntimeError):
    """The snake encloses no usable region (collapsed, flat, or escaped)."""


def signed_area(points: np.ndarray) -> float:
    """Shoelace area of a closed polygon; positive for counterclockwise travel
    in the (row, col)-as-(x, y) frame."""
    p = np.asarray(points, dtype=np.float64)
    x, y = p[:, 0], p[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


@dataclass(frozen=True)
class BoundaryRaster:
    """One boundary pixel per (edge, covered row), with the edge's sign.

    Arrays are parallel: ``rows[k]`` is the 1-based image row, ``cols[k]`` the
    1-based boundary column (clamped to the image), ``signs[k]`` the edge
    direction, and ``edges[k]`` the index of the contributing edge.
    """

    rows: np.ndarray
    cols: np.ndarray
    signs: np.ndarray
    edges: np.ndarray

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv(self) -> str:
        """Debug dump (edge index, row, col, sign) for visual overlays."""
        lines = ["edge,row,col,sign"]
        for e, j, l, s in zip(self.edges, self.rows, self.cols, self.signs):
            lines.append(f"{e},{j},{l},{s}")
        return "\n".join(lines) + "\n"


def rasterize_snake(points: np.ndarray, image_shape: tuple[int, int]) -> BoundaryRaster:
    """Boundary pixels of the closed polygon through ``points`` (fine samples).

    Each non-horizontal edge (by ceiled row endpoints) paints the pixel rows
    between its ceils, indexed by the upper row line: rows lo+1..hi for ceils
    lo < hi.  Pairing both travel directions onto the same rows keeps every
    pixel row's crossings balanced for a closed curve, so strips always come
    in cancelling pairs (no stray strip at row extrema).  The strip's column
    is the outer ceil of the edge's line over the row's span; rows outside
    the image are dropped and columns clamp to [1, cols].

    Raises DegenerateRegionError when nothing crosses a pixel row boundary
    (all points identical or the whole polygon inside one row band).
    """
    rows_img, cols_img = image_shape
    p = np.asarray(points, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != 2 or len(p) < 3:
        raise ValueError(f"need a closed polygon of >= 3 points, got shape {p.shape}")

    cx = np.ceil(p[:, 0]).astype(np.int64)
    cy = np.ceil(p[:, 1]).astype(np.int64)
    cx_next = np.roll(cx, -1)
    cy_next = np.roll(cy, -1)

    active = cx != cx_next  # everything else is horizontal and contributes nothing
    if not active.any():
        raise DegenerateRegionError("snake does not cross any pixel row boundary")

    ca = cx[active]
    cb = cx_next[active]
    ya = cy[active].astype(np.float64)
    slope = (cy_next[active] - cy[active]).astype(np.float64) / (cb - ca).astype(np.float64)
    sign = np.where(cb > ca, -1, 1).astype(np.int64)  # sign(x_i - x_{i+1})
    lo = np.minimum(ca, cb)
    counts = np.abs(cb - ca)
    edge_ids = np.nonzero(active)[0]

    # expand per-edge painted rows {lo+1, ..., hi}
    total = int(counts.sum())
    rep = np.repeat(np.arange(len(ca)), counts)
    offset = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    j = lo[rep] + 1 + offset

    # boundary column: outer ceil of the line over the row's span [j-1, j]
    r_above = ya[rep] + slope[rep] * (j - 1 - ca[rep]).astype(np.float64)
    r_below = r_above + slope[rep]
    c0 = np.ceil(r_above)
    c1 = np.ceil(r_below)
    l = np.where(sign[rep] < 0, np.minimum(c0, c1), np.maximum(c0, c1)).astype(np.int64)
    l = np.clip(l, 1, cols_img)

    inside = (j >= 1) & (j <= rows_img)
    raster = BoundaryRaster(
        rows=j[inside],
        cols=l[inside],
        signs=sign[rep][inside],
        edges=edge_ids[rep][inside],
    )
    for arr in (raster.rows, raster.cols, raster.signs, raster.edges):
        arr.setflags(write=False)
    if len(raster) == 0:
        raise DegenerateRegionError("snake lies entirely outside the image rows")
    return raster


def region_integrals(raster: BoundaryRaster, prefix: np.ndarray) -> tuple[float, float]:
    """Signed strip sums: (total intensity inside, enclosed pixel area).

    Both are positive for counterclockwise snakes; the area is in pixels.
    """
    s = raster.signs.astype(np.float64)
    i_omega = float(np.sum(s * prefix[raster.rows - 1, raster.cols]))
    area = float(np.sum(s * raster.cols))
    return i_omega, area
