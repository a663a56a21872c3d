"""Image loading, derivative fields, bilinear sampling, and row prefix sums.

Coordinate convention used across the package: images are (rows, cols) float
arrays with intensities in [0, 255]; a *point* (x, y) has x = row coordinate
and y = column coordinate, both 1-based reals, so the intensity sample at the
integer point (x, y) is ``intensity[x - 1, y - 1]`` and the point lies inside
pixel (ceil(x), ceil(y)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])


def grayscale_from_rgb(rgb: np.ndarray) -> np.ndarray:
    """Perceptual grayscale: 0.299 R + 0.587 G + 0.114 B."""
    return np.asarray(rgb, dtype=np.float64) @ GRAY_WEIGHTS


def _grayscale_from_pil(im: Image.Image) -> np.ndarray:
    if im.mode == "L":
        arr = np.asarray(im, dtype=np.float64)
    elif im.mode in ("1", "LA", "I", "I;16", "F"):
        arr = np.asarray(im.convert("L"), dtype=np.float64)
    else:
        arr = grayscale_from_rgb(np.asarray(im.convert("RGB")))
    if arr.ndim != 2 or arr.shape[0] < 3 or arr.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3 pixels, got {arr.shape}")
    return arr


def load_grayscale(path) -> np.ndarray:
    """Load a raster image (PNG/JPEG/BMP/GIF/TIFF) as a float grayscale array."""
    try:
        with Image.open(path) as im:
            im.load()
            return _grayscale_from_pil(im)
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        raise IOError(f"cannot read image {path!r}: {exc}") from exc


def load_grayscale_bytes(data: bytes) -> np.ndarray:
    """Decode an in-memory raster image (e.g. uploaded PNG) to float grayscale."""
    import io

    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            return _grayscale_from_pil(im)
    except (UnidentifiedImageError, OSError) as exc:
        raise IOError(f"cannot decode image bytes: {exc}") from exc


def default_filter_halfwidth(rows: int, cols: int) -> int:
    """Derivative filter half-width scaled to image size, clamped to [1, 5]."""
    return int(np.clip(min(rows, cols) // 100, 1, 5))


def _sobel_rowwise(f: np.ndarray) -> np.ndarray:
    """3x3 Sobel derivative along rows, replicate-padded, normalized to unit ramp response."""
    p = np.pad(f, 1, mode="edge")
    return (
        p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:]
        - p[:-2, :-2] - 2.0 * p[:-2, 1:-1] - p[:-2, 2:]
    ) / 8.0


def _prewitt_rowwise_interior(f: np.ndarray, q: int) -> np.ndarray:
    """(2q+1)^2 generalized Prewitt derivative along rows on the interior.

    q rows of -1, one zero row, q rows of +1 (each full width), normalized by
    q(q+1)(2q+1) so a unit ramp responds with exactly 1.  Returns the valid
    region only: shape (rows - 2q, cols - 2q).
    """
    rows, cols = f.shape
    acc = np.zeros((rows - 2 * q, cols), dtype=np.float64)
    for r in range(1, q + 1):
        acc += f[q + r : rows - q + r, :] - f[q - r : rows - q - r, :]
    box = np.zeros((rows - 2 * q, cols - 2 * q), dtype=np.float64)
    for c in range(-q, q + 1):
        box += acc[:, q + c : cols - q + c]
    return box / float(q * (q + 1) * (2 * q + 1))


def _derivative_rowwise(f: np.ndarray, q: int) -> np.ndarray:
    """Row-direction derivative: generalized Prewitt inside, Sobel near borders."""
    out = _sobel_rowwise(f)
    if q >= 1 and f.shape[0] > 2 * q and f.shape[1] > 2 * q:
        out[q:-q, q:-q] = _prewitt_rowwise_interior(f, q)
    return out


@dataclass(frozen=True)
class DerivativeFields:
    """First and second intensity derivatives on the pixel grid.

    x is the row direction and y the column direction; the mixed partial is
    computed once and shared.
    """

    ix: np.ndarray
    iy: np.ndarray
    ixx: np.ndarray
    ixy: np.ndarray
    iyy: np.ndarray
    q: int


def compute_derivative_fields(intensity: np.ndarray, q: int | None = None) -> DerivativeFields:
    """Five derivative fields of an image via repeated first-derivative filtering.

    Second derivatives are compositions of the first-derivative operator so
    that every field carries the same smoothing scale.
    """
    f = np.asarray(intensity, dtype=np.float64)
    rows, cols = f.shape
    if q is None:
        q = default_filter_halfwidth(rows, cols)
    if q < 1:
        raise ValueError(f"filter half-width must be >= 1, got {q}")
    if rows <= 2 * q + 1 or cols <= 2 * q + 1:
        raise ValueError(
            f"filter half-width {q} too large for a {rows}x{cols} image"
        )

    def dx(a):
        return _derivative_rowwise(a, q)

    def dy(a):
        return _derivative_rowwise(a.T, q).T

    ix = dx(f)
    iy = dy(f)
    fields = DerivativeFields(
        ix=ix, iy=iy, ixx=dx(ix), ixy=dy(ix), iyy=dy(iy), q=q
    )
    for arr in (fields.ix, fields.iy, fields.ixx, fields.ixy, fields.iyy):
        arr.setflags(write=False)
    return fields


def bilinear_sample(field: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of a grid field at real points (x=row, y=col).

    The four lattice neighbors of (x, y) are blended with weights from the
    fractional parts; indices are clamped to the grid, so points outside the
    image take the value of the nearest valid cell.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    rows, cols = field.shape
    x0 = np.floor(x)
    y0 = np.floor(y)
    fx = x - x0
    fy = y - y0
    i0 = np.clip(x0.astype(np.int64) - 1, 0, rows - 1)
    i1 = np.clip(i0 + 1, 0, rows - 1)
    j0 = np.clip(y0.astype(np.int64) - 1, 0, cols - 1)
    j1 = np.clip(j0 + 1, 0, cols - 1)
    return (
        field[i0, j0] * (1.0 - fx) * (1.0 - fy)
        + field[i1, j0] * fx * (1.0 - fy)
        + field[i0, j1] * (1.0 - fx) * fy
        + field[i1, j1] * fx * fy
    )


def build_row_prefix(intensity: np.ndarray) -> np.ndarray:
    """Per-row prefix sums: prefix[j-1, l] = sum of the first l pixels of row j.

    Shape (rows, cols + 1) with a zero leading column, so any horizontal strip
    integral is one subtraction.
    """
    f = np.asarray(intensity, dtype=np.float64)
    prefix = np.zeros((f.shape[0], f.shape[1] + 1), dtype=np.float64)
    np.cumsum(f, axis=1, out=prefix[:, 1:])
    prefix.setflags(write=False)
    return prefix


def box_sum(prefix: np.ndarray, r0: int, r1: int, c0: int, c1: int) -> float:
    """Total intensity of the 1-based inclusive pixel rectangle [r0,r1]x[c0,c1]."""
    rows, cols = prefix.shape[0], prefix.shape[1] - 1
    if not (1 <= r0 <= r1 <= rows and 1 <= c0 <= c1 <= cols):
        raise ValueError(
            f"box ({r0},{r1},{c0},{c1}) outside a {rows}x{cols} image"
        )
    return float(prefix[r0 - 1 : r1, c1].sum() - prefix[r0 - 1 : r1, c0 - 1].sum())
