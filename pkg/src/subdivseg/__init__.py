"""Closed subdivision-curve snakes for image segmentation.

The package evolves a closed control polygon toward an object boundary by
minimizing a blend of a directional gradient energy and a bounding-box
contrast energy, using analytic gradients and a limited-memory quasi-Newton
driver.  Curves are evaluated exactly on the dyadic parameter grid through
precomputed basic-function tables for two refinement rules: the interpolatory
four-point rule and the cubic B-spline rule.
"""

from .subdivision import (
    ControlPolygon,
    CubicBSpline,
    FourPoint,
    build_basic_table,
    evaluate_curve,
    interpolation_operator,
    refine_once,
)

__all__ = [
    "ControlPolygon",
    "CubicBSpline",
    "FourPoint",
    "build_basic_table",
    "evaluate_curve",
    "interpolation_operator",
    "refine_once",
]

__version__ = "0.1.0"
