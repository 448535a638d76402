"""Composite Gauss-Legendre grids and product-integration Nystrom rows.

A row ``R(t)`` approximates ``int_lo^hi kappa(t, s) g(s) phi(s) ds`` by
``R(t) @ phi(nodes)``.  On panels where ``kappa(t, .)`` is smooth the row is
the plain Gauss rule.  On a panel containing a kink of ``kappa(t, .)`` (the
diagonal ``s = t`` or a sign change) the panel is split at the kinks, each
piece gets its own Gauss rule, and ``phi`` is carried to those points by the
panel's degree ``order - 1`` Lagrange interpolant.  This keeps the
discretization spectrally accurate for piecewise-affine kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import defaults
from .quadrature import gauss_legendre

_KINK_EPS = 1e-13


def _barycentric_weights(x):
    n = len(x)
    w = np.ones(n)
    for j in range(n):
        for m in range(n):
            if m != j:
                w[j] /= x[j] - x[m]
    return w


def lagrange_matrix(xn, xq, bary=None):
    """Matrix ``L`` with ``L @ values(xn)`` = interpolant evaluated at ``xq``."""
    xn = np.asarray(xn, dtype=float)
    xq = np.atleast_1d(np.asarray(xq, dtype=float))
    bary = _barycentric_weights(xn) if bary is None else bary
    diff = xq[:, None] - xn[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    terms = bary[None, :] / diff
    L = terms / terms.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    L[rows] = exact[rows].astype(float)
    return L


@dataclass(frozen=True)
class PanelGrid:
    """Gauss-Legendre nodes on a tiling of ``[lo, hi]``.

    ``edges`` are the panel boundaries; nodes of panel ``p`` occupy
    ``slice(p*order, (p+1)*order)``.
    """

    edges: np.ndarray
    order: int = defaults.QUAD_ORDER
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
            raise ValueError("panel edges must be strictly increasing")
        x, w = gauss_legendre(self.order)
        half = 0.5 * (e[1:] - e[:-1])
        mid = 0.5 * (e[1:] + e[:-1])
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "nodes", (mid[:, None] + half[:, None] * x[None, :]).ravel())
        object.__setattr__(self, "weights", (half[:, None] * w[None, :]).ravel())

    @classmethod
    def build(cls, lo=0.0, hi=1.0, n_panels=16, extra_edges=(), order=defaults.QUAD_ORDER):
        base = np.linspace(lo, hi, int(n_panels) + 1)
        pts = [p for p in extra_edges if lo < p < hi]
        edges = np.unique(np.concatenate([base, pts]))
        # merge edges closer than a tiny gap so no panel degenerates
        keep = [edges[0]]
        for x in edges[1:]:
            if x - keep[-1] > 1e-9 * (hi - lo):
                keep.append(x)
            else:
                keep[-1] = x if x in pts else keep[-1]
        keep[0], keep[-1] = lo, hi
        return cls(np.array(keep), order)

    @property
    def lo(self):
        return float(self.edges[0])

    @property
    def hi(self):
        return float(self.edges[-1])

    @property
    def n_panels(self):
        return len(self.edges) - 1

    @property
    def size(self):
        return self.nodes.size

    def panel_of(self, t):
        """Index of the panel containing ``t`` (edges belong to the right panel)."""
        p = np.searchsorted(self.edges, t, side="right") - 1
        return np.clip(p, 0, self.n_panels - 1)

    def panel_slice(self, p):
        return slice(p * self.order, (p + 1) * self.order)

    def interpolation_matrix(self, t):
        """Rows mapping node values to panel-local interpolants at points ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        P = np.zeros((t.size, self.size))
        x, _ = gauss_legendre(self.order)
        bary = _barycentric_weights(x)
        panels = self.panel_of(t)
        for p in np.unique(panels):
            idx = np.nonzero(panels == p)[0]
            a, b = self.edges[p], self.edges[p + 1]
            ref = (2.0 * t[idx] - (a + b)) / (b - a)
            P[np.ix_(idx, np.arange(p * self.order, (p + 1) * self.order))] = lagrange_matrix(x, ref, bary)
        return P

    def interpolate(self, values, t):
        return self.interpolation_matrix(t) @ np.asarray(values, dtype=float)

    def extended_points(self):
        """Nodes together with panel edges, sorted."""
        return np.sort(np.concatenate([self.nodes, self.edges]))


def product_rows(kappa, kinks, weight, grid: PanelGrid, t_eval) -> np.ndarray:
    """Nystrom rows for the kernel ``kappa(t, s) * weight(s)`` on ``grid``.

    ``kappa`` is vectorized in both arguments, ``kinks(t)`` lists the points
    where ``kappa(t, .)`` is not smooth, ``weight`` is vectorized in ``s``.
    """
    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    s = grid.nodes
    gs = np.asarray(weight(s), dtype=float)
    rows = kappa(t_eval[:, None], s[None, :]) * (gs * grid.weights)[None, :]
    x, w = gauss_legendre(grid.order)
    bary = _barycentric_weights(x)
    edges = grid.edges
    span = edges[-1] - edges[0]
    for i, t in enumerate(t_eval):
        pts = [p for p in kinks(float(t)) if edges[0] < p < edges[-1]]
        if not pts:
            continue
        pts = np.asarray(pts)
        owners = grid.panel_of(pts)
        for p in np.unique(owners):
            a, b = edges[p], edges[p + 1]
            inner = pts[(owners == p) & (pts > a + _KINK_EPS * span) & (pts < b - _KINK_EPS * span)]
            if inner.size == 0:
                continue
            cuts = np.concatenate([[a], np.unique(inner), [b]])
            half = 0.5 * (cuts[1:] - cuts[:-1])
            mid = 0.5 * (cuts[1:] + cuts[:-1])
            sq = (mid[:, None] + half[:, None] * x[None, :]).ravel()
            wq = (half[:, None] * w[None, :]).ravel()
            vals = np.asarray(kappa(np.full_like(sq, t), sq), dtype=float) * np.asarray(weight(sq), dtype=float) * wq
            ref = (2.0 * sq - (a + b)) / (b - a)
            rows[i, grid.panel_slice(p)] = vals @ lagrange_matrix(x, ref, bary)
    return rows
