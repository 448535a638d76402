"""The growth thresholds ``m`` and ``M`` and the choice of ``[a, b]``.

``1/m = sup_t int_0^1 |k(t,s)| g(s) ds`` controls index-1 conditions and
``1/M = inf_{t in [a,b]} int_a^b k(t,s) g(s) ds`` controls index-0
conditions.  Every quantity is available numerically for any weight; for
``g = 1`` closed forms are available too and the two routes are
cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import defaults
from .errors import BoundError, NumericError
from .kernels import DerivativeKernel, KernelSpec, ThreePointKernel, WeightFunction
from .quadrature import extremize, integrate

CROSS_CHECK_TOL = 1e-7


@dataclass(frozen=True)
class BoundResult:
    value: float
    witness_t: float
    method: str  # "closed_form" | "numeric"
    estimated_error: float = 0.0


@dataclass(frozen=True)
class IntervalResult:
    a: float
    b: float
    M: float
    method: str


def _abs_integral(kernel, g, t, tol, part="abs", lo=0.0, hi=1.0):
    bps = kernel.abs_breakpoints(t)
    if part == "abs":
        fn = lambda s: np.abs(kernel.eval(t, s)) * g(s)
    elif part == "plus":
        fn = lambda s: np.maximum(kernel.eval(t, s), 0.0) * g(s)
    elif part == "minus":
        fn = lambda s: np.maximum(-kernel.eval(t, s), 0.0) * g(s)
    else:
        fn = lambda s: kernel.eval(t, s) * g(s)
        bps = kernel.breakpoints(t)
    return integrate(fn, lo, hi, bps, tol)


def sup_abs_integral(kernel: KernelSpec, g: WeightFunction, tol=defaults.INTEGRATE_TOL):
    """``(t*, sup_t int_0^1 |k(t,s)| g(s) ds)``."""
    return extremize(lambda t: _abs_integral(kernel, g, t, tol), "sup", 0.0, 1.0)


def compute_m(kernel: KernelSpec, g: WeightFunction, tol=defaults.INTEGRATE_TOL) -> BoundResult:
    t_star, sup = sup_abs_integral(kernel, g, tol)
    if not sup > 0:
        raise BoundError("zero denominator: sup_t int |k(t,s)| g(s) ds vanishes (degenerate weight)")
    return BoundResult(1.0 / sup, t_star, "numeric", tol / sup**2)


def compute_m_refined(kernel: KernelSpec, g: WeightFunction, tol=defaults.INTEGRATE_TOL) -> BoundResult:
    """Threshold from ``sup_t max(int k^+ g, int k^- g)``; never below :func:`compute_m`."""

    def scan(t):
        return max(_abs_integral(kernel, g, t, tol, "plus"), _abs_integral(kernel, g, t, tol, "minus"))

    t_star, sup = extremize(scan, "sup", 0.0, 1.0)
    if not sup > 0:
        raise BoundError("zero denominator: sup_t max(int k^+ g, int k^- g) vanishes (degenerate weight)")
    return BoundResult(1.0 / sup, t_star, "numeric", tol / sup**2)


def inf_interval_integral(kernel, g, a, b, tol=defaults.INTEGRATE_TOL, grid_n=defaults.EXTREMIZE_GRID):
    """``(t*, inf_{t in [a,b]} int_a^b k(t,s) g(s) ds)``."""
    return extremize(lambda t: _abs_integral(kernel, g, t, tol, "signed", a, b), "inf", a, b, grid_n=grid_n)


def compute_M(kernel: KernelSpec, g: WeightFunction, a=None, b=None, tol=defaults.INTEGRATE_TOL) -> BoundResult:
    a = kernel.a if a is None else float(a)
    b = kernel.b if b is None else float(b)
    if not 0.0 <= a < b <= 1.0:
        raise BoundError(f"invalid interval [{a}, {b}]")
    t_star, inf = inf_interval_integral(kernel, g, a, b, tol)
    if not inf > 0:
        raise BoundError(
            f"kernel not positive on interval [{a}, {b}]: inf_t int_a^b k g ds = {inf!r}"
        )
    return BoundResult(1.0 / inf, t_star, "numeric", tol / inf**2)


# --- closed forms for g = 1 ------------------------------------------------------


def vartheta1(t, alpha, eta):
    """``int_0^1 |k_1(t,s)| ds`` for ``0 <= t <= (1 - alpha*eta)/(1 - alpha)``."""
    return -t**2 / 2 + (eta**2 / 2 - alpha * eta**2 + 0.5) / (1 - alpha) - eta**2 / 2


def vartheta2(t, alpha, eta):
    """``int_0^1 |k_1(t,s)| ds`` for ``(1 - alpha*eta)/(1 - alpha) <= t <= 1``."""
    return ((-alpha + 2) / (-2 * alpha)) * t**2 + (2 / alpha) * t + (
        (-alpha - alpha**2 * eta**2 + 2) / (-2 * alpha * (1 - alpha))
    )


def theta1(t, alpha, xi):
    return -t**2 / 2 - alpha * xi + 0.5


def theta2(t, alpha, xi):
    return -t**2 / 2 + 2 * xi * t - 2 * xi + alpha * xi + 0.5


def closed_form_m(kernel: KernelSpec) -> BoundResult:
    """``m`` for a unit weight."""
    if isinstance(kernel, ThreePointKernel):
        al, eta = kernel.alpha, kernel.eta
        if -2 * al * eta**2 + al + 1 >= 0:
            return BoundResult(1.0 / vartheta1(0.0, al, eta), 0.0, "closed_form")
        return BoundResult(1.0 / vartheta2(1.0, al, eta), 1.0, "closed_form")
    if isinstance(kernel, DerivativeKernel):
        return BoundResult(1.0 / theta1(0.0, kernel.alpha, kernel.xi), 0.0, "closed_form")
    raise TypeError(f"no closed form for {type(kernel).__name__}")


def inverse_M_closed_form(kernel: KernelSpec, b: float) -> float:
    """``1/M(0, b)`` for a unit weight, ``0 < b <= eta`` (resp. ``xi``)."""
    if isinstance(kernel, ThreePointKernel):
        return ((1 - kernel.alpha * kernel.eta) / (1 - kernel.alpha) - b) * b
    if isinstance(kernel, DerivativeKernel):
        return (1 - kernel.alpha) * b - b**2
    raise TypeError(f"no closed form for {type(kernel).__name__}")


def optimal_interval(kernel: KernelSpec) -> IntervalResult:
    """Interval ``[0, b]`` minimizing ``M`` for a unit weight."""
    if isinstance(kernel, ThreePointKernel):
        b = min((1 - kernel.alpha * kernel.eta) / (2 * (1 - kernel.alpha)), kernel.eta)
    elif isinstance(kernel, DerivativeKernel):
        b = min((1 - kernel.alpha) / 2, kernel.xi)
    else:
        raise TypeError(f"no closed form for {type(kernel).__name__}")
    return IntervalResult(0.0, b, 1.0 / inverse_M_closed_form(kernel, b), "closed_form")


def optimal_interval_numeric(kernel: KernelSpec, g: WeightFunction, tol=defaults.INTEGRATE_TOL,
                             grid_n=defaults.EXTREMIZE_GRID, inner_grid=16) -> IntervalResult:
    """Interval ``[0, b]`` minimizing ``M(0, b)`` for a general weight.

    ``a`` is pinned at 0; ``b`` ranges over ``(0, p]`` where ``p`` is eta or xi.
    """
    _, p = kernel.positivity_interval
    b_min = p / (4 * grid_n)

    def inv_M(b):
        if b <= 0:
            return 0.0
        return inf_interval_integral(kernel, g, 0.0, b, tol, inner_grid)[1]

    b_star, inv = extremize(inv_M, "sup", b_min, p, grid_n=grid_n)
    if not inv > 0:
        raise BoundError("zero denominator: no b gives a positive integral of k g over [0, b] "
                         "(weight vanishes or kernel not positive there)")
    return IntervalResult(0.0, b_star, 1.0 / inv, "numeric")


def cross_check_m(kernel: KernelSpec, g: WeightFunction, tol=CROSS_CHECK_TOL) -> dict:
    """Numeric and closed-form ``m`` side by side; raises if they disagree."""
    num = compute_m(kernel, g)
    out = {"numeric": num}
    if g.is_unit():
        cf = closed_form_m(kernel)
        out["closed_form"] = cf
        if abs(cf.value - num.value) > tol * abs(cf.value):
            raise NumericError(
                f"closed-form m = {cf.value!r} and numeric m = {num.value!r} disagree beyond {tol}"
            )
    return out
