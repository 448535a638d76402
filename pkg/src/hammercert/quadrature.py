"""Breakpoint-aware composite Gauss-Legendre quadrature and 1-D extremization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import defaults
from .errors import QuadratureError

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple:
    """Reference nodes and weights on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(a: float, b: float, breakpoints=()) -> np.ndarray:
    """``[a, b]`` split at the breakpoints strictly inside it."""
    inner = sorted({float(p) for p in breakpoints if a < p < b})
    return np.array([a] + inner + [b], dtype=float)


@dataclass(frozen=True)
class PanelRule:
    """A fixed-order Gauss-Legendre rule on each panel of a tiling.

    ``depth`` halvings are applied to every base panel.
    """

    edges: np.ndarray
    order: int = defaults.QUAD_ORDER
    depth: int = 0

    @property
    def panels(self) -> np.ndarray:
        base = np.asarray(self.edges, dtype=float)
        k = 2**self.depth
        frac = np.arange(k + 1) / k
        sub = base[:-1, None] + (base[1:] - base[:-1])[:, None] * frac[None, :]
        return np.concatenate([sub[:, :-1].ravel(), base[-1:]])

    def nodes_weights(self) -> tuple:
        e = self.panels
        x, w = gauss_legendre(self.order)
        half = 0.5 * (e[1:] - e[:-1])
        mid = 0.5 * (e[1:] + e[:-1])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return nodes, weights

    def apply(self, f) -> float:
        nodes, weights = self.nodes_weights()
        if nodes.size == 0:
            return 0.0
        return float(np.dot(weights, np.asarray(f(nodes), dtype=float)))


def integrate_with_error(f, a, b, breakpoints=(), tol=defaults.INTEGRATE_TOL,
                         order=defaults.QUAD_ORDER, max_depth=defaults.INTEGRATE_MAX_DEPTH):
    """Like :func:`integrate` but returns ``(value, error_estimate, depth)``."""
    if b < a:
        raise ValueError(f"integrate needs a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0, 0.0, 0
    edges = panel_edges(a, b, breakpoints)
    prev = PanelRule(edges, order, 0).apply(f)
    err = math.inf
    for depth in range(1, max_depth + 1):
        cur = PanelRule(edges, order, depth).apply(f)
        err = abs(cur - prev)
        if not math.isfinite(cur):
            raise QuadratureError("integrand is not finite", cur, err)
        if err <= tol:
            return cur, err, depth
        prev = cur
    raise QuadratureError(f"no convergence after {max_depth} halvings", prev, err)


def integrate(f, a, b, breakpoints=(), tol=defaults.INTEGRATE_TOL,
              order=defaults.QUAD_ORDER, max_depth=defaults.INTEGRATE_MAX_DEPTH) -> float:
    """Integrate a vectorized ``f`` over ``[a, b]``.

    The interval is first split at ``breakpoints`` (kinks of a piecewise
    integrand), then every panel is halved until two successive refinements
    agree to ``tol``.  Raises :class:`QuadratureError` carrying the best
    estimate when ``max_depth`` halvings are not enough.
    """
    return integrate_with_error(f, a, b, breakpoints, tol, order, max_depth)[0]


def extremize(g, mode="sup", a=0.0, b=1.0, grid_n=defaults.EXTREMIZE_GRID,
              refine_tol=defaults.EXTREMIZE_TOL) -> tuple:
    """Locate ``sup`` or ``inf`` of a continuous scalar function on ``[a, b]``.

    A uniform scan of ``grid_n`` points picks the best node (leftmost on
    ties); golden-section search then refines inside the two neighbouring
    cells.  The refined point replaces the grid node only when strictly
    better, so flat functions keep the leftmost extremizer.  Returns
    ``(t_star, value)``.
    """
    if mode not in ("sup", "inf"):
        raise ValueError(f"mode must be 'sup' or 'inf', got {mode!r}")
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    sign = 1.0 if mode == "sup" else -1.0

    def h(t):
        return sign * float(g(float(t)))

    if a == b:
        return float(a), float(g(float(a)))
    ts = np.linspace(a, b, grid_n)
    vals = np.array([h(t) for t in ts])
    i = int(np.argmax(vals))
    best_t, best_v = float(ts[i]), float(vals[i])
    lo, hi = float(ts[max(i - 1, 0)]), float(ts[min(i + 1, grid_n - 1)])

    # golden-section on the bracket, maximizing h
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = h(x1), h(x2)
    while hi - lo > refine_tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = h(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = h(x2)
    cand_t, cand_v = (x1, f1) if f1 >= f2 else (x2, f2)
    # rounding noise must not move a flat extremum off the leftmost node
    if cand_v > best_v + 8 * np.finfo(float).eps * max(1.0, abs(best_v)):
        best_t, best_v = cand_t, cand_v
    return best_t, sign * best_v
