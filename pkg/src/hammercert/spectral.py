"""Nystrom matrices of the positive linear operators and their spectral data.

``L`` has kernel ``|k| g`` on [0, 1]; ``L+`` has kernel ``k+ g``, either on
[0, 1] or restricted to the cone interval ``[a, b]``.  The principal
eigenpair comes from power iteration started at the all-ones vector, and
the reported radius is the upper Collatz-Wielandt quotient of the final
iterate, so the stored eigenvector certifies ``A w <= r w`` by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import defaults
from .errors import SpectralError, ValidationError
from .kernels import KernelSpec, WeightFunction
from .nystrom import PanelGrid, product_rows

MODES = ("abs", "positive_part", "signed")
_ZERO_RADIUS = 1e-14
NEGATIVE_ENTRY_TOL = 1e-4


@dataclass(frozen=True)
class NystromMatrix:
    """Square matrix acting on node values: ``(A @ x)_i ~ int kappa(t_i, s) x(s) ds``."""

    grid: PanelGrid
    matrix: np.ndarray
    domain: tuple
    mode: str
    rule: str = "product"
    clipped: float = 0.0  # relative row mass removed by clipping negative entries

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, x):
        return self.matrix @ x


def _kappa(kernel: KernelSpec, mode: str):
    if mode == "abs":
        return lambda t, s: np.abs(kernel.eval(t, s))
    if mode == "positive_part":
        return lambda t, s: np.maximum(kernel.eval(t, s), 0.0)
    return kernel.eval


def _panels_for(N: int, order: int) -> int:
    return max(1, math.ceil(N / order))


def make_grid(domain=(0.0, 1.0), N=defaults.SPECTRAL_N, extra_edges=(), order=defaults.QUAD_ORDER) -> PanelGrid:
    lo, hi = float(domain[0]), float(domain[1])
    return PanelGrid.build(lo, hi, _panels_for(N, order), extra_edges, order)


def discretize_callable(kappa, kinks, g, domain=(0.0, 1.0), N=defaults.SPECTRAL_N, *,
                        extra_edges=(), rule="product", grid: Optional[PanelGrid] = None,
                        mode="custom") -> NystromMatrix:
    """Nystrom matrix of an arbitrary kernel ``kappa(t, s) * g(s)``.

    ``kinks(t)`` lists the non-smooth points of ``kappa(t, .)``.  With
    ``rule="plain"`` the entries are ``kappa(t_i, t_j) g(t_j) w_j``;
    ``"product"`` integrates the kinks exactly against the panel interpolant.
    """
    if N < 8:
        raise ValidationError(f"Nystrom grid needs N >= 8, got {N}")
    if rule not in ("product", "plain"):
        raise ValidationError(f"unknown Nystrom rule {rule!r}")
    grid = grid or make_grid(domain, N, extra_edges)
    weight = g if callable(g) else (lambda s: np.full_like(np.asarray(s, dtype=float), float(g)))
    if rule == "plain":
        s = grid.nodes
        A = kappa(s[:, None], s[None, :]) * (np.asarray(weight(s), dtype=float) * grid.weights)[None, :]
    else:
        A = product_rows(kappa, kinks, weight, grid, grid.nodes)
    A = np.asarray(A, dtype=float)
    clipped = 0.0
    if mode in ("abs", "positive_part"):
        A, clipped = _clip_nonnegative(A)
    return NystromMatrix(grid, A, (grid.lo, grid.hi), mode, rule, clipped)


def _clip_nonnegative(A: np.ndarray) -> tuple:
    """Clip a discretized nonnegative kernel, returning ``(matrix, clipped_mass)``.

    Lagrange product weights are signed, so entries next to a sliver of
    kernel support can dip below zero.  Clipping perturbs the matrix by the
    largest negative row mass (reported relative to the row-sum norm), and
    that perturbation bounds the shift of the spectral radius.
    """
    if not A.size:
        return A, 0.0
    norm = max(float(np.abs(A).sum(axis=1).max()), 1e-300)
    mass = float(np.maximum(-A, 0.0).sum(axis=1).max()) / norm
    if mass > NEGATIVE_ENTRY_TOL:
        raise SpectralError(f"discretized positive kernel has relative negative row mass {mass!r}; "
                            f"refine the grid", mass)
    return np.maximum(A, 0.0), mass


def discretize(kernel: KernelSpec, g: WeightFunction, mode="abs", domain=None,
               N=defaults.SPECTRAL_N, *, support=None, rule="product",
               grid: Optional[PanelGrid] = None) -> NystromMatrix:
    """Discretize ``L`` (``mode="abs"``) or ``L+`` (``mode="positive_part"``).

    For ``positive_part`` the ``s``-integral runs over ``support``, by default
    the kernel's cone interval ``[a, b]``; ``domain`` is the range of ``t``
    and of the grid.  ``domain=(0, 1)`` gives ``L+`` and ``domain=(a, b)``
    gives its restriction.  ``support=(0, 1)`` requests the full ``k+``
    operator.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    if domain is None:
        domain = (0.0, 1.0) if mode != "positive_part" else (kernel.a, kernel.b)
    lo, hi = float(domain[0]), float(domain[1])
    if not 0.0 <= lo < hi <= 1.0:
        raise ValidationError(f"invalid domain [{lo}, {hi}]")
    kappa = _kappa(kernel, mode)
    edges = [kernel.point]
    if mode == "positive_part":
        sa, sb = (kernel.a, kernel.b) if support is None else (float(support[0]), float(support[1]))
        if (sa, sb) != (0.0, 1.0) and sb > kernel.positivity_interval[1] + 1e-14:
            raise ValidationError(
                f"k+ support must lie inside [0, {kernel.positivity_interval[1]}], got [{sa}, {sb}]"
            )
        if (sa, sb) != (0.0, 1.0):
            base = kappa
            kappa = lambda t, s: base(t, s) * ((s >= sa) & (s <= sb))
            edges += [sa, sb]
    kinks = kernel.abs_breakpoints if mode != "signed" else kernel.breakpoints
    return discretize_callable(kappa, kinks, g, (lo, hi), N,
                               extra_edges=edges, rule=rule, grid=grid, mode=mode)


def shared_grid(kernel: KernelSpec, N=defaults.SPECTRAL_N) -> PanelGrid:
    """Grid on [0, 1] with edges at every kink that does not move with ``t``."""
    return make_grid((0.0, 1.0), N, (kernel.point, kernel.a, kernel.b))


@dataclass(frozen=True)
class SpectralResult:
    r: float
    mu: Optional[float]
    eigvec: np.ndarray = field(repr=False)
    iterations: int
    N: int
    bracket: tuple = (0.0, 0.0)  # lower/upper Collatz-Wielandt quotients
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "mu": self.mu,
            "iterations": self.iterations,
            "N": self.N,
            "bracket": list(self.bracket),
            "degenerate": self.degenerate,
        }


def _as_array(A) -> np.ndarray:
    return A.matrix if isinstance(A, NystromMatrix) else np.asarray(A, dtype=float)


def collatz_quotients(A, x) -> tuple:
    """``(min, max)`` of ``(A x)_i / x_i`` over entries with ``x_i > 0``."""
    M = _as_array(A)
    x = np.asarray(x, dtype=float)
    y = M @ x
    pos = x > 0
    if not pos.any():
        return 0.0, math.inf
    q = y[pos] / x[pos]
    upper = float(q.max())
    if np.any(y[~pos] > 0):
        upper = math.inf
    return float(q.min()), upper


def spectral_radius(A, tol=defaults.POWER_TOL, max_iter=defaults.POWER_MAX_ITER) -> SpectralResult:
    """Principal eigenpair of a nonnegative matrix by power iteration."""
    M = _as_array(A)
    n = M.shape[0]
    x = np.ones(n)
    y = M @ x
    lam = float(np.max(np.abs(y)))
    if lam < _ZERO_RADIUS:
        return SpectralResult(0.0, None, x, 0, n, (0.0, 0.0), True)
    x = y / lam
    for it in range(1, max_iter + 1):
        y = M @ x
        new = float(np.max(np.abs(y)))
        if new < _ZERO_RADIUS:
            return SpectralResult(0.0, None, x, it, n, (0.0, 0.0), True)
        x_next = y / new
        done = abs(new - lam) <= tol * max(1.0, new) and np.max(np.abs(x_next - x)) <= math.sqrt(tol)
        x, lam = x_next, new
        if done:
            lo, hi = collatz_quotients(M, x)
            r = hi if math.isfinite(hi) else lam
            return SpectralResult(r, 1.0 / r, x, it, n, (lo, r), False)
    raise SpectralError(f"power iteration did not converge in {max_iter} steps", (lam, x))


def collatz_upper_bound(A, w, lam, tol=defaults.COLLATZ_TOL) -> bool:
    """True when ``lam * w >= A w`` entrywise, which certifies ``r(A) <= lam``."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or not np.any(w > 0):
        raise ValidationError("Collatz test vector must be nonnegative and nonzero")
    y = _as_array(A) @ w
    scale = max(1.0, float(np.max(np.abs(y))))
    return bool(np.all(lam * w - y >= -tol * scale))


def resolvent_solution(A, mu, eps, C) -> np.ndarray:
    """``x = (I - (mu - eps) A)^{-1} (C * ones)``, checked for positivity."""
    M = _as_array(A)
    lam = mu - eps
    r = spectral_radius(M).r
    if lam * r >= 1.0:
        raise SpectralError(
            f"Neumann series divergent: (mu - eps) * r(A) = {lam * r!r} >= 1", lam * r
        )
    n = M.shape[0]
    x = np.linalg.solve(np.eye(n) - lam * M, np.full(n, float(C)))
    if np.any(x < -1e-12 * max(1.0, float(np.max(np.abs(x))))):
        raise SpectralError("resolvent is not positive on this discretization", x)
    return x


def neumann_partial_sum(A, lam, C, terms=50) -> np.ndarray:
    M = _as_array(A)
    term = np.full(M.shape[0], float(C))
    total = term.copy()
    for _ in range(terms):
        term = lam * (M @ term)
        total += term
    return total


def resolvent_bound_R0(mats, mus, eps, Cs) -> float:
    """``max_i || (I - (mu_i - eps) A_i)^{-1} C_i ||_inf``."""
    eps_list = eps if np.ndim(eps) else [eps] * len(mats)
    out = 0.0
    for A, mu, e, C in zip(mats, mus, eps_list, Cs):
        if C == 0:
            continue
        out = max(out, float(np.max(np.abs(resolvent_solution(A, mu, e, C)))))
    return out


def phi_weighted_mass(kernel: KernelSpec, g: WeightFunction, cap_values, grid: PanelGrid) -> float:
    """``C = int_0^1 Phi(s) g(s) phi(s) ds`` with ``phi`` sampled at the grid nodes."""
    s = grid.nodes
    return float(np.dot(grid.weights, kernel.phi_upper(s) * g(s) * np.asarray(cap_values, dtype=float)))


@dataclass(frozen=True)
class OperatorSpectra:
    """Spectral data of ``L``, ``L+`` and the restriction of ``L+`` to ``[a, b]``."""

    L: SpectralResult
    L_plus: SpectralResult
    L_plus_bar: SpectralResult
    matrices: dict = field(repr=False, compare=False)

    def to_dict(self) -> dict:
        return {"L": self.L.to_dict(), "L_plus": self.L_plus.to_dict(), "L_plus_bar": self.L_plus_bar.to_dict()}


def operator_spectra(kernel: KernelSpec, g: WeightFunction, N=defaults.SPECTRAL_N, tol=defaults.POWER_TOL) -> OperatorSpectra:
    grid = shared_grid(kernel, N)
    full = discretize(kernel, g, "abs", (0.0, 1.0), N, grid=grid)
    plus = discretize(kernel, g, "positive_part", (0.0, 1.0), N, grid=grid)
    bar = discretize(kernel, g, "positive_part", (kernel.a, kernel.b), N)
    return OperatorSpectra(
        spectral_radius(full, tol),
        spectral_radius(plus, tol),
        spectral_radius(bar, tol),
        {"L": full, "L_plus": plus, "L_plus_bar": bar},
    )


def grid_study(kernel: KernelSpec, g: WeightFunction, mode="abs", sizes=(32, 64, 128, 256)) -> list:
    """Spectral radius on successively doubled grids with Cauchy differences."""
    rows, prev = [], None
    for n in sizes:
        res = spectral_radius(discretize(kernel, g, mode, None, n))
        rows.append({"N": res.N, "r": res.r, "mu": res.mu,
                     "delta": None if prev is None else abs(res.r - prev)})
        prev = res.r
    return rows


def cone_image_gap(A: NystromMatrix, x, interval, c) -> float:
    """``min_{[a,b]} (A x) - c * max |A x|`` on grid nodes; nonnegative for cone images."""
    y = A.matrix @ np.asarray(x, dtype=float)
    a, b = interval
    nodes = A.nodes
    inside = (nodes >= a) & (nodes <= b)
    if not inside.any():
        raise ValidationError("no grid nodes inside the cone interval")
    return float(np.min(y[inside]) - c * np.max(np.abs(y)))
