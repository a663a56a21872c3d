"""Subdivision schemes, basic-function tables, and exact dyadic curve evaluation.

A closed control polygon ``P = (p_0, ..., p_{M-1})`` defines a smooth periodic
limit curve ``r(t) = sum_j p_j * phi(t - j)`` where ``phi`` is the basic limit
function of the refinement rule (the limit of subdividing delta data).  Because
``phi`` has compact support and exact values on the dyadic grid ``i / 2**k``,
the curve and its tangent can be evaluated exactly at ``2**k * M`` parameters
as a dense matrix product against precomputed tables.

Two rules are provided:

* ``FourPoint`` -- the interpolatory four-point rule with tension ``omega``
  (default 1/16); control points lie on the limit curve.
* ``CubicBSpline`` -- the approximating cubic B-spline rule; control points do
  not lie on the curve, so an exact circulant interpolation operator is
  provided to convert on-curve targets into control points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

# Largest tension value for which the four-point limit curve still has a
# continuous tangent (open interval).
OMEGA_C1_LIMIT = (math.sqrt(5.0) - 1.0) / 8.0


@dataclass(frozen=True)
class FourPoint:
    """Interpolatory four-point refinement rule with tension ``omega``."""

    omega: float = 1.0 / 16.0

    #: basic function support is (-support, support)
    support: int = field(default=3, init=False, repr=False)
    min_points: int = field(default=4, init=False, repr=False)
    interpolatory: bool = field(default=True, init=False, repr=False)
    name: str = field(default="four-point", init=False, repr=False)

    def __post_init__(self):
        if not (0.0 < self.omega < OMEGA_C1_LIMIT):
            raise ValueError(
                f"four-point tension must lie in (0, {OMEGA_C1_LIMIT:.6f}) "
                f"for a C1 limit curve, got {self.omega}"
            )

    def refine(self, pts: np.ndarray) -> np.ndarray:
        """One periodic refinement step: old vertices kept, new midpoints inserted."""
        w = self.omega
        nxt = np.roll(pts, -1, axis=0)
        prv = np.roll(pts, 1, axis=0)
        nxt2 = np.roll(pts, -2, axis=0)
        odd = (w + 0.5) * (pts + nxt) - w * (prv + nxt2)
        out = np.empty((2 * len(pts),) + pts.shape[1:], dtype=np.float64)
        out[0::2] = pts
        out[1::2] = odd
        return out

    def limit(self, pts: np.ndarray) -> np.ndarray:
        """Limit positions of level-k vertices (identity: the rule interpolates)."""
        return np.asarray(pts, dtype=np.float64)

    def tangent(self, pts: np.ndarray, depth: int) -> np.ndarray:
        """Exact limit-curve derivative d r/d t at the level-``depth`` vertices."""
        nxt = np.roll(pts, -1, axis=0)
        prv = np.roll(pts, 1, axis=0)
        nxt2 = np.roll(pts, -2, axis=0)
        prv2 = np.roll(pts, 2, axis=0)
        scale = float(2**depth) / (1.0 - 4.0 * self.omega)
        return scale * (0.5 * (nxt - prv) - self.omega * (nxt2 - prv2))


@dataclass(frozen=True)
class CubicBSpline:
    """Approximating cubic B-spline refinement rule."""

    support: int = field(default=2, init=False, repr=False)
    min_points: int = field(default=3, init=False, repr=False)
    interpolatory: bool = field(default=False, init=False, repr=False)
    name: str = field(default="cubic-bspline", init=False, repr=False)

    def refine(self, pts: np.ndarray) -> np.ndarray:
        nxt = np.roll(pts, -1, axis=0)
        prv = np.roll(pts, 1, axis=0)
        even = (prv + 6.0 * pts + nxt) / 8.0
        odd = 0.5 * (pts + nxt)
        out = np.empty((2 * len(pts),) + pts.shape[1:], dtype=np.float64)
        out[0::2] = even
        out[1::2] = odd
        return out

    def limit(self, pts: np.ndarray) -> np.ndarray:
        """Push level-k vertices onto the limit curve: (p_{i-1} + 4 p_i + p_{i+1}) / 6."""
        nxt = np.roll(pts, -1, axis=0)
        prv = np.roll(pts, 1, axis=0)
        return (prv + 4.0 * pts + nxt) / 6.0

    def tangent(self, pts: np.ndarray, depth: int) -> np.ndarray:
        """Exact limit-curve derivative d r/d t at the level-``depth`` vertices.

        The centered difference of neighbors gives the derivative in the
        *level-k index* scale; the ``2**depth`` factor converts it to the
        control-index parameter ``t`` so tangents are comparable across depths.
        """
        nxt = np.roll(pts, -1, axis=0)
        prv = np.roll(pts, 1, axis=0)
        return float(2 ** (depth - 1)) * (nxt - prv)


Scheme = FourPoint | CubicBSpline

_SCHEME_NAMES = {"four-point": FourPoint, "cubic-bspline": CubicBSpline}


def scheme_from_name(name: str, omega: float | None = None) -> Scheme:
    """Build a scheme from its wire-format name ('four-point' / 'cubic-bspline')."""
    if name not in _SCHEME_NAMES:
        raise ValueError(f"unknown scheme {name!r}; expected one of {sorted(_SCHEME_NAMES)}")
    if name == "four-point":
        return FourPoint() if omega is None else FourPoint(omega)
    if omega is not None:
        raise ValueError("omega only applies to the four-point scheme")
    return CubicBSpline()


@dataclass(frozen=True)
class ControlPolygon:
    """Closed M-vertex polygon in image (row, col) coordinates.

    ``vertices`` has shape (M, 2) with columns (row, col); index arithmetic is
    M-periodic.  These are the optimization variables of the snake.
    """

    vertices: np.ndarray
    scheme: Scheme

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError(f"vertices must have shape (M, 2), got {v.shape}")
        if len(v) < self.scheme.min_points:
            raise ValueError(
                f"{self.scheme.name} needs at least {self.scheme.min_points} "
                f"control points, got {len(v)}"
            )
        if not np.isfinite(v).all():
            raise ValueError("control points must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    def with_vertices(self, vertices: np.ndarray) -> "ControlPolygon":
        return ControlPolygon(vertices, self.scheme)

    def to_dict(self) -> dict:
        """Wire format: {"scheme": ..., "omega"?: ..., "points": [[row, col], ...]}."""
        out: dict = {"scheme": self.scheme.name}
        if isinstance(self.scheme, FourPoint):
            out["omega"] = self.scheme.omega
        out["points"] = [[float(r), float(c)] for r, c in self.vertices]
        return out

    @staticmethod
    def from_dict(data: dict) -> "ControlPolygon":
        scheme = scheme_from_name(data["scheme"], data.get("omega"))
        return ControlPolygon(np.asarray(data["points"], dtype=np.float64), scheme)


def refine_once(points: np.ndarray, scheme: Scheme, closed: bool = True) -> np.ndarray:
    """Apply one refinement step to a polygon, doubling its vertex count.

    Only closed (periodic) polygons are supported; the new vertices follow the
    scheme's even/odd rules with wrapped index arithmetic.
    """
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < scheme.min_points:
        raise ValueError(
            f"{scheme.name} needs at least {scheme.min_points} points, got {len(pts)}"
        )
    if not closed:
        raise ValueError("only closed (periodic) polygons are supported")
    return scheme.refine(pts)


@dataclass(frozen=True)
class BasicFunctionTable:
    """Exact values of the basic limit function phi and its derivative.

    ``phi[m]`` and ``dphi[m]`` hold phi and phi' at the dyadic offset
    ``m / 2**depth - support``; both arrays cover [-support, support] and
    vanish outside the open support interval.
    """

    scheme: Scheme
    depth: int
    phi: np.ndarray
    dphi: np.ndarray

    def at(self, numerator: int) -> float:
        """phi at offset numerator / 2**depth (0 outside the support)."""
        idx = numerator + self.scheme.support * 2**self.depth
        if idx < 0 or idx >= len(self.phi):
            return 0.0
        return float(self.phi[idx])

    def derivative_at(self, numerator: int) -> float:
        idx = numerator + self.scheme.support * 2**self.depth
        if idx < 0 or idx >= len(self.dphi):
            return 0.0
        return float(self.dphi[idx])


@lru_cache(maxsize=None)
def build_basic_table(scheme: Scheme, depth: int) -> BasicFunctionTable:
    """Tabulate phi and phi' on the dyadic grid by refining delta data.

    Delta data on a window wide enough that periodic wrap cannot reach the
    support is refined ``depth`` times; the refined values are exact control
    values at level ``depth``, which the scheme's limit stencil maps onto the
    curve and its tangent stencil maps onto the exact derivative.
    """
    if depth < 1:
        raise ValueError(f"table depth must be >= 1, got {depth}")
    half = scheme.support + 2  # margin so the periodic window never self-overlaps
    window = 2 * half + 1
    values = np.zeros(window, dtype=np.float64)
    values[half] = 1.0  # delta centered at offset 0
    for _ in range(depth):
        values = scheme.refine(values)

    phi = scheme.limit(values)
    dphi = scheme.tangent(values, depth)

    # extract [-support, support]; index of offset 0 is half * 2**depth
    center = half * 2**depth
    span = scheme.support * 2**depth
    phi = phi[center - span : center + span + 1].copy()
    dphi = dphi[center - span : center + span + 1].copy()
    phi.setflags(write=False)
    dphi.setflags(write=False)
    return BasicFunctionTable(scheme=scheme, depth=depth, phi=phi, dphi=dphi)


@lru_cache(maxsize=None)
def _periodized_weights(scheme: Scheme, depth: int, m_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense evaluation matrices W, Wd of shape (2**depth * M, M).

    ``W[i, j] = sum_m phi(i / 2**depth - j - m*M)`` (periodic wrap; more than
    one ``m`` contributes when the polygon is shorter than the support width).
    ``points = W @ P`` and ``tangents = Wd @ P``.
    """
    table = build_basic_table(scheme, depth)
    n = m_points * 2**depth
    span = scheme.support * 2**depth
    # fine-grid integer offsets i - j*2**depth, then wrapped by the fine period n
    nums = np.arange(n)[:, None] - np.arange(m_points)[None, :] * 2**depth
    w = np.zeros((n, m_points), dtype=np.float64)
    wd = np.zeros((n, m_points), dtype=np.float64)
    reach = span // n + 1
    for m in range(-reach - 1, reach + 2):
        shifted = nums + m * n
        mask = (shifted >= -span) & (shifted <= span)
        if not mask.any():
            continue
        idx = shifted[mask] + span
        w[mask] += table.phi[idx]
        wd[mask] += table.dphi[idx]
    w.setflags(write=False)
    wd.setflags(write=False)
    return w, wd


def evaluation_weights(scheme: Scheme, depth: int, m_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached (W, Wd) evaluation matrices for an M-point polygon at a depth."""
    return _periodized_weights(scheme, depth, m_points)


@dataclass(frozen=True)
class CurveSample:
    """The 2**depth * M exact on-curve points and tangents of a polygon."""

    points: np.ndarray
    tangents: np.ndarray
    depth: int
    source: ControlPolygon


def evaluate_curve(polygon: ControlPolygon, table: BasicFunctionTable) -> CurveSample:
    """Evaluate the limit curve and its tangents on the dyadic grid i / 2**depth."""
    if table.scheme != polygon.scheme:
        raise ValueError(
            f"table built for {table.scheme.name} cannot evaluate a "
            f"{polygon.scheme.name} polygon"
        )
    w, wd = evaluation_weights(polygon.scheme, table.depth, len(polygon))
    return CurveSample(
        points=w @ polygon.vertices,
        tangents=wd @ polygon.vertices,
        depth=table.depth,
        source=polygon,
    )


# --- circulant interpolation operator (cubic B-spline only) ------------------
#
# At integer parameters the B-spline curve is S @ P with S the circulant matrix
# whose first row is (2/3, 1/6, 0, ..., 0, 1/6).  Its eigenvalues on the
# Fourier basis are b_s = 2/3 + (1/3) cos(2 pi s / M) > 1/3, so S is never
# singular and its inverse is the circulant with first column given by the
# inverse DFT of 1/b_s, which reduces to the real cosine sums below.


@lru_cache(maxsize=None)
def interpolation_matrix(m_points: int) -> np.ndarray:
    """Closed-form inverse of the B-spline integer-parameter evaluation matrix."""
    if m_points < 3:
        raise ValueError(f"need at least 3 interpolation targets, got {m_points}")
    m = m_points
    r = np.arange(m)
    if m % 2 == 0:
        tt = np.arange(1, m // 2)
        inv_b = 1.0 / (2.0 / 3.0 + (1.0 / 3.0) * np.cos(2.0 * np.pi * tt / m))
        col = (
            1.0 / m
            + (3.0 / m) * np.cos(np.pi * r)
            + (2.0 / m) * (inv_b[None, :] * np.cos(2.0 * np.pi * r[:, None] * tt[None, :] / m)).sum(axis=1)
        )
    else:
        tt = np.arange(1, (m - 1) // 2 + 1)
        inv_b = 1.0 / (2.0 / 3.0 + (1.0 / 3.0) * np.cos(2.0 * np.pi * tt / m))
        col = (
            1.0 / m
            + (2.0 / m) * (inv_b[None, :] * np.cos(2.0 * np.pi * r[:, None] * tt[None, :] / m)).sum(axis=1)
        )
    # circulant: A[s, t] = col[(s - t) mod M]
    a = col[(r[:, None] - r[None, :]) % m]
    a.setflags(write=False)
    return a


def interpolation_operator(targets: ControlPolygon) -> ControlPolygon:
    """Control points whose B-spline curve passes through the given targets.

    The returned polygon satisfies ``curve(i) = targets[i]`` at every integer
    parameter; only meaningful for the cubic B-spline scheme (the four-point
    rule already interpolates its control points).
    """
    if not isinstance(targets.scheme, CubicBSpline):
        raise ValueError("interpolation operator applies to the cubic B-spline scheme only")
    a = interpolation_matrix(len(targets))
    return targets.with_vertices(a @ targets.vertices)
