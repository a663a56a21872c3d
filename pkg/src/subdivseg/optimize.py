"""Limited-memory quasi-Newton minimization of the snake energy.

The driver owns its iteration loop so that single-stepping, mid-run blend
changes, and user edits of control points compose deterministically:

* ``step`` performs exactly one accepted quasi-Newton step (or one blend-phase
  transition); running it N times reproduces ``run`` with an N-iteration cap
  bit for bit.
* In two-phase mode the blend starts region-dominated (long-range attraction)
  and switches to gradient-dominated (boundary snap) once the snake
  stabilizes: when the largest control-point displacement stays below
  ``step_tol`` for ``stabilization_window`` consecutive accepted steps.
* A step is accepted only if it satisfies the strong Wolfe conditions
  (sufficient decrease and curvature), found by bracketing plus cubic
  interpolation; evaluations that collapse the enclosed region count as
  infinite energy, so the search backtracks away from degenerate geometry.
* Curvature pairs are discarded whenever the objective or the geometry
  changes under the optimizer (blend switch, external point edit) since they
  describe a function that no longer exists.

Every event appends one JSON-serializable record to the trace; identical
inputs yield identical traces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import EnergyEval, EnergyModel
from .raster import DegenerateRegionError, signed_area
from .subdivision import ControlPolygon, build_basic_table, evaluate_curve

RUNNING = "running"
CONVERGED = "converged"
MAX_ITERS = "max-iters"
DEGENERATE = "degenerate"

_WOLFE_C1 = 1e-4
_WOLFE_C2 = 0.9
_MAX_BRACKET = 20
_MAX_ZOOM = 30


@dataclass(frozen=True)
class OptimizerConfig:
    """Iteration limits, tolerances (in pixels), and the blend schedule.

    ``alpha_mode`` is ``"two-phase"`` (start at ``alpha_start``, finish at
    ``alpha_final``) or ``"fixed"`` (constant ``alpha_fixed``).  ``grad_tol``
    applies to the infinity norm of the gradient; ``step_tol`` to the largest
    per-point displacement of an accepted step.
    """

    alpha_mode: str = "two-phase"
    alpha_fixed: float = 0.5
    alpha_start: float = 0.1
    alpha_final: float = 0.9
    max_iters: int = 200
    grad_tol: float = 1e-4
    step_tol: float = 1e-3
    stabilization_window: int = 5
    memory: int = 10

    def __post_init__(self):
        if self.alpha_mode not in ("two-phase", "fixed"):
            raise ValueError(f"alpha_mode must be 'two-phase' or 'fixed', got {self.alpha_mode!r}")
        for name in ("alpha_fixed", "alpha_start", "alpha_final"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if min(self.grad_tol, self.step_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1 or self.stabilization_window < 1 or self.memory < 1:
            raise ValueError("iteration limits must be positive")


class SnakeOptimizer:
    """Stateful minimizer for one snake on one energy model.

    The initial polygon is normalized to counterclockwise orientation (by the
    signed area of its sampled curve) so the region strip sums are positive;
    a degenerate starting region raises immediately.
    """

    def __init__(self, model: EnergyModel, polygon: ControlPolygon, config: OptimizerConfig):
        self.model = model
        self.config = config
        if not model.box.contains_points(polygon.vertices):
            raise ValueError("initial control polygon must lie inside the region box")

        table = build_basic_table(polygon.scheme, model.depth)
        sample = evaluate_curve(polygon, table)
        if signed_area(sample.points) < 0.0:
            polygon = polygon.with_vertices(polygon.vertices[::-1].copy())
        self.polygon = polygon

        if config.alpha_mode == "two-phase":
            self.alpha = config.alpha_start
            self._final_phase = False
        else:
            self.alpha = config.alpha_fixed
            self._final_phase = True

        self.status = RUNNING
        self.iters = 0
        self.trace: list[dict] = []
        self._s: list[np.ndarray] = []
        self._y: list[np.ndarray] = []
        self._rho: list[float] = []
        self._stable_steps = 0
        self._first_step = True
        self._eval: EnergyEval = model.evaluate(self.polygon, self.alpha)
        self._record("init", max_disp=0.0)

    @property
    def evaluation(self) -> EnergyEval:
        """Energy, gradient, and geometry at the current polygon."""
        return self._eval

    # --- trace -----------------------------------------------------------------

    def _record(self, event: str, max_disp: float = 0.0, **extra) -> dict:
        ev = self._eval
        rec = {
            "iter": self.iters,
            "event": event,
            "alpha": self.alpha,
            "e_total": ev.value,
            "e_grad": ev.e_grad,
            "e_reg": ev.e_reg,
            "grad_norm": float(np.abs(ev.grad).max()),
            "max_disp": max_disp,
            "status": self.status,
        }
        rec.update(extra)
        self.trace.append(rec)
        return rec

    def _stop(self, status: str, reason: str) -> None:
        self.status = status
        self._record("stop", reason=reason)

    # --- quasi-Newton memory ------------------------------------------------------

    def reset_memory(self) -> None:
        """Drop curvature pairs; the objective or geometry changed under us."""
        self._s.clear()
        self._y.clear()
        self._rho.clear()
        self._first_step = True

    def _direction(self, g: np.ndarray) -> np.ndarray:
        """Two-loop recursion over the stored curvature pairs."""
        q = -g.copy()
        if not self._s:
            return q
        alphas = []
        for s, y, rho in zip(reversed(self._s), reversed(self._y), reversed(self._rho)):
            a = rho * float(s @ q)
            q -= a * y
            alphas.append(a)
        s, y = self._s[-1], self._y[-1]
        q *= float(s @ y) / float(y @ y)
        for (s, y, rho), a in zip(zip(self._s, self._y, self._rho), reversed(alphas)):
            b = rho * float(y @ q)
            q += (a - b) * s
        return q

    # --- external interaction -----------------------------------------------------

    def move_point(self, index: int, row: float, col: float) -> dict:
        """Apply a user edit to one control point and restart the local model.

        The edit is validated first (it must keep the region usable); then the
        curvature memory is cleared and the optimizer resumes from the edited
        polygon.
        """
        m = len(self.polygon)
        if not (0 <= index < m):
            raise IndexError(f"control point index {index} out of range 0..{m - 1}")
        vertices = self.polygon.vertices.copy()
        vertices[index] = (row, col)
        candidate = self.polygon.with_vertices(vertices)
        if not self.model.box.contains_points(candidate.vertices):
            raise ValueError("edited control point leaves the region box")
        self._eval = self.model.evaluate(candidate, self.alpha)  # raises if degenerate
        self.polygon = candidate
        self.reset_memory()
        self._stable_steps = 0
        self.status = RUNNING
        return self._record("edit", index=index, memory="reset")

    def set_alpha(self, mode: str, value: float | None = None) -> dict:
        """Switch the blend schedule mid-run (fixed value or fresh two-phase)."""
        if mode == "fixed":
            if value is None or not (0.0 <= value <= 1.0):
                raise ValueError("fixed mode needs a blend value in [0, 1]")
            self.alpha = float(value)
            self._final_phase = True
        elif mode == "two-phase":
            self.alpha = self.config.alpha_start
            self._final_phase = False
        else:
            raise ValueError(f"unknown blend mode {mode!r}")
        self.reset_memory()
        self._stable_steps = 0
        self.status = RUNNING
        self._eval = self.model.evaluate(self.polygon, self.alpha)
        return self._record("alpha-mode", memory="reset")

    # --- stepping ------------------------------------------------------------------

    def _switch_phase(self) -> dict:
        self.iters += 1
        self.alpha = self.config.alpha_final
        self._final_phase = True
        self.reset_memory()
        self._stable_steps = 0
        self._eval = self.model.evaluate(self.polygon, self.alpha)
        return self._record("alpha-switch", memory="reset")

    def step(self) -> dict | None:
        """One accepted quasi-Newton step or one phase transition.

        Returns the appended trace record, or None when the optimizer is (or
        becomes) terminal.
        """
        if self.status != RUNNING:
            return None
        if self.iters >= self.config.max_iters:
            self._stop(MAX_ITERS, "iteration budget exhausted")
            return None

        g = self._eval.grad
        if float(np.abs(g).max()) < self.config.grad_tol or self._stable_steps >= self.config.stabilization_window:
            reason = "gradient below tolerance" if float(np.abs(g).max()) < self.config.grad_tol else "position stabilized"
            if not self._final_phase:
                return self._switch_phase()
            self._stop(CONVERGED, reason)
            return None

        d = self._direction(g)
        if float(d @ g) >= 0.0:
            # stale curvature produced a non-descent direction
            self.reset_memory()
            d = -g.copy()

        found = self._line_search(d)
        if found is None:
            if not self._final_phase:
                return self._switch_phase()
            if self._search_saw_degenerate:
                self._stop(DEGENERATE, "no admissible step avoids a degenerate region")
            else:
                self._stop(CONVERGED, "no further decrease along the search direction")
            return None

        step_len, new_eval = found
        step_vec = step_len * d
        new_polygon = self.polygon.with_vertices(
            self.polygon.vertices + step_vec.reshape(-1, 2)
        )
        y = new_eval.grad - g
        sy = float(step_vec @ y)
        if sy > 1e-10 * float(np.linalg.norm(step_vec)) * float(np.linalg.norm(y)):
            self._s.append(step_vec)
            self._y.append(y)
            self._rho.append(1.0 / sy)
            if len(self._s) > self.config.memory:
                self._s.pop(0)
                self._y.pop(0)
                self._rho.pop(0)

        max_disp = float(np.sqrt((step_vec.reshape(-1, 2) ** 2).sum(axis=1)).max())
        self._stable_steps = self._stable_steps + 1 if max_disp < self.config.step_tol else 0
        self.polygon = new_polygon
        self._eval = new_eval
        self.iters += 1
        self._first_step = False
        return self._record("step", max_disp=max_disp)

    def run(self, max_steps: int | None = None) -> None:
        """Step until terminal (or until max_steps more accepted steps/transitions)."""
        budget = self.config.max_iters if max_steps is None else max_steps
        done = 0
        while self.status == RUNNING and done < budget:
            if self.step() is None:
                break
            done += 1

    # --- line search -----------------------------------------------------------------

    def _phi(self, a: float, d: np.ndarray):
        """Energy (and eval) at ``polygon + a * d``; +inf when inadmissible.

        Trial points are inadmissible when the region collapses or when any
        control point leaves the region box: outside the box the strip sums
        clamp to the image and the region contrast is no longer a bounded
        mean difference, so the search must not go there.
        """
        vertices = self.polygon.vertices + a * d.reshape(-1, 2)
        if not self.model.box.contains_points(vertices):
            return np.inf, None
        try:
            ev = self.model.evaluate(self.polygon.with_vertices(vertices), self.alpha)
        except DegenerateRegionError:
            self._search_saw_degenerate = True
            return np.inf, None
        # a simple closed curve keeps both region means inside the image's
        # intensity range; means outside it signal a self-overlapping boundary
        # whose signed strips fake an arbitrarily deep contrast
        lo, hi = self.model.intensity_low - 1.0, self.model.intensity_high + 1.0
        if not (lo <= ev.mean_inside <= hi and lo <= ev.mean_outside <= hi):
            return np.inf, None
        return ev.value, ev

    def _line_search(self, d: np.ndarray) -> tuple[float, EnergyEval] | None:
        """Strong Wolfe search along d: bracket, then zoom with cubic interpolation."""
        self._search_saw_degenerate = False
        ev0 = self._eval
        phi0 = ev0.value
        dphi0 = float(ev0.grad @ d)
        if dphi0 >= 0.0:
            return None

        if self._first_step:
            # cap the very first trial so the snake cannot jump across the image
            a = min(1.0, 1.0 / max(1e-12, float(np.abs(d).max())))
        else:
            a = 1.0
        a_prev, phi_prev, dphi_prev = 0.0, phi0, dphi0
        ev_a = None

        for i in range(_MAX_BRACKET):
            phi_a, ev_a = self._phi(a, d)
            if phi_a > phi0 + _WOLFE_C1 * a * dphi0 or (i > 0 and phi_a >= phi_prev) or not np.isfinite(phi_a):
                return self._zoom(a_prev, phi_prev, dphi_prev, a, phi_a, d, phi0, dphi0)
            dphi_a = float(ev_a.grad @ d)
            if abs(dphi_a) <= -_WOLFE_C2 * dphi0:
                return a, ev_a
            if dphi_a >= 0.0:
                return self._zoom(a, phi_a, dphi_a, a_prev, phi_prev, d, phi0, dphi0)
            a_prev, phi_prev, dphi_prev = a, phi_a, dphi_a
            a *= 2.0
        return None

    def _zoom(self, lo, phi_lo, dphi_lo, hi, phi_hi, d, phi0, dphi0):
        """Shrink [lo, hi] keeping the Wolfe-admissible point bracketed."""
        ev_best = None
        for _ in range(_MAX_ZOOM):
            if np.isfinite(phi_hi) and hi != lo:
                # cubic minimizer from values at both ends and the slope at lo
                span = hi - lo
                c = (phi_hi - phi_lo - dphi_lo * span) / (span * span)
                a = lo - dphi_lo / (2.0 * c) if c > 0 else 0.5 * (lo + hi)
                if not np.isfinite(a) or a <= min(lo, hi) + 0.1 * abs(span) or a >= max(lo, hi) - 0.1 * abs(span):
                    a = 0.5 * (lo + hi)
            else:
                a = 0.5 * (lo + hi)
            if abs(hi - lo) < 1e-14 or a <= 0.0:
                return None
            phi_a, ev_a = self._phi(a, d)
            if phi_a > phi0 + _WOLFE_C1 * a * dphi0 or phi_a >= phi_lo or not np.isfinite(phi_a):
                hi, phi_hi = a, phi_a
                continue
            dphi_a = float(ev_a.grad @ d)
            if abs(dphi_a) <= -_WOLFE_C2 * dphi0:
                return a, ev_a
            if dphi_a * (hi - lo) >= 0.0:
                hi, phi_hi = lo, phi_lo
            lo, phi_lo, dphi_lo = a, phi_a, dphi_a
            ev_best = (a, ev_a)
        # ran out of zoom budget: accept the best sufficient-decrease point if any
        return ev_best


def minimize(
    model: EnergyModel, polygon: ControlPolygon, config: OptimizerConfig
) -> tuple[ControlPolygon, list[dict], str]:
    """Run the optimizer to a terminal status; equivalent to repeated step()."""
    opt = SnakeOptimizer(model, polygon, config)
    while opt.status == RUNNING:
        opt.step()
    return opt.polygon, opt.trace, opt.status
