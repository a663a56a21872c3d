"""Synthetic test imagery, polygon fill masks, and the Jaccard metric.

Masks classify pixels by their integer lattice point: pixel (i, j) belongs to
a shape when the point (x=i, y=j) does, matching the sampling convention of
the rest of the package.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .subdivision import ControlPolygon, FourPoint, build_basic_table, evaluate_curve


def fill_polygon_mask(points: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Even-odd scanline fill of a closed polygon into a boolean pixel mask.

    A pixel (i, j) is inside when a ray from (i, j) toward smaller columns
    crosses the polygon an odd number of times.  Edges are treated half-open
    in the row direction so scanlines through vertices count once.
    """
    rows, cols = shape
    p = np.asarray(points, dtype=np.float64)
    xa, ya = p[:, 0], p[:, 1]
    xb, yb = np.roll(xa, -1), np.roll(ya, -1)
    mask = np.zeros((rows, cols), dtype=bool)
    js = np.arange(1, cols + 1, dtype=np.float64)
    for i in range(1, rows + 1):
        hit = ((xa <= i) & (i < xb)) | ((xb <= i) & (i < xa))
        if not hit.any():
            continue
        t = (i - xa[hit]) / (xb[hit] - xa[hit])
        crossings = np.sort(ya[hit] + t * (yb[hit] - ya[hit]))
        inside = np.searchsorted(crossings, js, side="left") % 2 == 1
        mask[i - 1] = inside
    return mask


def disc_mask(shape: tuple[int, int], center: tuple[float, float], radius: float) -> np.ndarray:
    rows, cols = shape
    x = np.arange(1, rows + 1, dtype=np.float64)[:, None]
    y = np.arange(1, cols + 1, dtype=np.float64)[None, :]
    return (x - center[0]) ** 2 + (y - center[1]) ** 2 <= radius**2


def ellipse_mask(
    shape: tuple[int, int], center: tuple[float, float], semi_row: float, semi_col: float
) -> np.ndarray:
    rows, cols = shape
    x = np.arange(1, rows + 1, dtype=np.float64)[:, None]
    y = np.arange(1, cols + 1, dtype=np.float64)[None, :]
    return ((x - center[0]) / semi_row) ** 2 + ((y - center[1]) / semi_col) ** 2 <= 1.0


def blob_mask(
    polygon: ControlPolygon, shape: tuple[int, int], depth: int = 6
) -> np.ndarray:
    """Fill of the limit curve of a control polygon, sampled densely."""
    sample = evaluate_curve(polygon, build_basic_table(polygon.scheme, depth))
    return fill_polygon_mask(sample.points, shape)


def star_polygon(
    center: tuple[float, float],
    radius_outer: float,
    radius_inner: float,
    n_vertices: int,
    phase: float = 0.0,
) -> np.ndarray:
    """Vertices alternating between two radii; a petaled blob once subdivided."""
    angles = phase + 2.0 * np.pi * np.arange(n_vertices) / n_vertices
    radii = np.where(np.arange(n_vertices) % 2 == 0, radius_outer, radius_inner)
    return np.stack(
        [center[0] + radii * np.cos(angles), center[1] + radii * np.sin(angles)], axis=1
    )


def circle_polygon(
    center: tuple[float, float], radius: float, n_vertices: int, phase: float = 0.0
) -> np.ndarray:
    angles = phase + 2.0 * np.pi * np.arange(n_vertices) / n_vertices
    return np.stack(
        [center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)], axis=1
    )


def compose_image(mask: np.ndarray, fg: float, bg: float) -> np.ndarray:
    """Two-level image: foreground intensity on the mask, background elsewhere."""
    return np.where(mask, float(fg), float(bg))


def save_gray_png(path, intensity: np.ndarray) -> None:
    arr = np.clip(np.asarray(intensity), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path)


def save_mask_png(path, mask: np.ndarray) -> None:
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(path)


def load_mask_png(path) -> np.ndarray:
    """Ground-truth mask: any nonzero pixel belongs to the object."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L")) > 0


def jaccard_distance(omega: np.ndarray, gamma: np.ndarray) -> float:
    """1 - |intersection| / |union| of two pixel masks; 0 means identical."""
    a = np.asarray(omega, dtype=bool)
    b = np.asarray(gamma, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = np.logical_or(a, b).sum()
    if union == 0:
        raise ValueError("both masks are empty; Jaccard distance undefined")
    inter = np.logical_and(a, b).sum()
    return 1.0 - float(inter) / float(union)
