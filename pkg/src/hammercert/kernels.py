"""Green's functions of the two nonlocal boundary value problems and their cone data.

``ThreePointKernel`` belongs to ``u'' + g f = 0, u'(0) = 0, alpha*u(eta) = u(1)``
and ``DerivativeKernel`` to ``v'' + g f = 0, v'(0) = 0, v(1) = alpha*v'(xi)``.
Both kernels are piecewise affine in ``s`` and may change sign; on a
subinterval ``[a, b]`` of ``[0, eta]`` (resp. ``[0, xi]``) they dominate
``c * (1 - s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import KernelError, ValidationError
from .expr import Expression

_EDGE_EPS = 1e-14


class _KernelBase:
    """Behaviour shared by both kernel variants."""

    alpha: float
    interval: tuple

    @property
    def point(self) -> float:
        raise NotImplementedError

    @property
    def a(self) -> float:
        return self.interval[0]

    @property
    def b(self) -> float:
        return self.interval[1]

    @property
    def positivity_interval(self) -> tuple:
        """Largest ``[0, p]`` in which any ``[a, b]`` is admissible."""
        return (0.0, self.point)

    def phi_upper(self, s):
        """The bound ``Phi(s) = 1 - s``."""
        return 1.0 - np.asarray(s, dtype=float) if np.ndim(s) else 1.0 - float(s)

    def eval_dt(self, t, s):
        """Partial derivative in ``t``: ``-1`` where ``s <= t``, else 0."""
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        return -(s <= t).astype(float)

    def breakpoints(self, t: float) -> list:
        """Interior kinks of ``s -> k(t, s)`` in (0, 1), sorted and deduplicated."""
        pts = sorted({float(t), self.point})
        return [p for p in pts if 0.0 < p < 1.0]

    def zero_crossings(self, t: float) -> list:
        """Sign changes of ``s -> k(t, s)``, solved exactly on each affine branch."""
        edges = [0.0] + self.breakpoints(t) + [1.0]
        vals = self.eval(t, np.asarray(edges))
        roots = []
        for lo, hi, klo, khi in zip(edges[:-1], edges[1:], vals[:-1], vals[1:]):
            if klo * khi < 0:
                root = lo + (hi - lo) * klo / (klo - khi)
                if lo < root < hi:
                    roots.append(float(root))
        return roots

    def abs_breakpoints(self, t: float) -> list:
        """Kinks of ``|k(t, .)|`` and ``k^+(t, .)``: branch kinks plus zero crossings."""
        return sorted(set(self.breakpoints(t)) | set(self.zero_crossings(t)))

    def _check_interval(self):
        a, b = self.interval
        lo, hi = self.positivity_interval
        if not (lo - _EDGE_EPS <= a < b <= hi + _EDGE_EPS):
            raise KernelError(
                f"interval [{a}, {b}] must satisfy 0 <= a < b <= {self._point_name} = {hi} "
                f"(the kernel is only bounded below by c*(1-s) for t in [0, {self._point_name}])"
            )


@dataclass(frozen=True)
class ThreePointKernel(_KernelBase):
    """Kernel of ``u'(0) = 0, alpha*u(eta) = u(1)`` with ``alpha < 0``.

    ``interval`` defaults to the optimal interval for a unit weight.
    """

    alpha: float
    eta: float
    interval: Optional[tuple] = field(default=None)

    _point_name = "eta"

    def __post_init__(self):
        if not self.alpha < 0:
            raise KernelError(f"three-point kernel requires alpha < 0, got alpha = {self.alpha}")
        if not 0.0 < self.eta < 1.0:
            raise KernelError(f"three-point kernel requires 0 < eta < 1, got eta = {self.eta}")
        if self.interval is None:
            q = (1.0 - self.alpha * self.eta) / (2.0 * (1.0 - self.alpha))
            object.__setattr__(self, "interval", (0.0, min(q, self.eta)))
        object.__setattr__(self, "interval", (float(self.interval[0]), float(self.interval[1])))
        self._check_interval()

    @property
    def point(self) -> float:
        return self.eta

    @property
    def c(self) -> float:
        return (1.0 - self.eta) / (1.0 - self.alpha)

    @property
    def label(self) -> str:
        return f"three_point(alpha={self.alpha!r}, eta={self.eta!r})"

    def eval(self, t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        al = self.alpha
        out = (1.0 - s) / (1.0 - al)
        out = out - np.where(s <= self.eta, al / (1.0 - al) * (self.eta - s), 0.0)
        out = out - np.where(s <= t, t - s, 0.0)
        return out if out.ndim else float(out)

    def with_interval(self, interval) -> "ThreePointKernel":
        return ThreePointKernel(self.alpha, self.eta, tuple(interval))


@dataclass(frozen=True)
class DerivativeKernel(_KernelBase):
    """Kernel of ``v'(0) = 0, v(1) = alpha*v'(xi)`` with ``0 < alpha < 1 - xi``."""

    alpha: float
    xi: float
    interval: Optional[tuple] = field(default=None)

    _point_name = "xi"

    def __post_init__(self):
        if not 0.0 < self.xi < 1.0:
            raise KernelError(f"derivative kernel requires 0 < xi < 1, got xi = {self.xi}")
        if not 0.0 < self.alpha < 1.0 - self.xi:
            raise KernelError(
                f"derivative kernel requires 0 < alpha < 1 - xi, got alpha = {self.alpha}, xi = {self.xi}"
            )
        if self.interval is None:
            object.__setattr__(self, "interval", (0.0, min((1.0 - self.alpha) / 2.0, self.xi)))
        object.__setattr__(self, "interval", (float(self.interval[0]), float(self.interval[1])))
        self._check_interval()

    @property
    def point(self) -> float:
        return self.xi

    @property
    def c(self) -> float:
        return 1.0 - self.alpha - self.xi

    @property
    def label(self) -> str:
        return f"derivative(alpha={self.alpha!r}, xi={self.xi!r})"

    def eval(self, t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        out = (1.0 - s) - np.where(s <= self.xi, self.alpha, 0.0)
        out = out - np.where(s <= t, t - s, 0.0)
        return out if out.ndim else float(out)

    def with_interval(self, interval) -> "DerivativeKernel":
        return DerivativeKernel(self.alpha, self.xi, tuple(interval))


KernelSpec = Union[ThreePointKernel, DerivativeKernel]


def eval_kernel(kernel: KernelSpec, t, s):
    return kernel.eval(t, s)


def phi_upper(kernel: KernelSpec, s):
    return kernel.phi_upper(s)


def breakpoints(kernel: KernelSpec, t: float) -> list:
    return kernel.breakpoints(t)


class WeightFunction:
    """Nonnegative weight ``g`` on [0, 1], from an expression in ``t`` or a callable.

    Nonnegativity is checked on a uniform sample at construction; positivity
    of the integral of ``Phi * g`` over ``[a, b]`` is left to the bound
    computations, which report a degenerate weight as a zero denominator.
    """

    def __init__(self, source: Union[str, float, Callable, Expression], name: str = "g", samples: int = 1001):
        self.name = name
        if isinstance(source, (int, float)):
            source = repr(float(source))
        if isinstance(source, str):
            source = Expression(source, variables=("t",))
        if isinstance(source, Expression):
            self.expression = source
            self._fn = lambda t: source(t=np.asarray(t, dtype=float))
        else:
            self.expression = None
            self._fn = source
        ts = np.linspace(0.0, 1.0, samples)
        vals = np.asarray(self(ts), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValidationError(f"weight {name} is not finite on [0, 1]")
        if np.any(vals < 0):
            bad = float(ts[np.argmax(vals < 0)])
            raise ValidationError(f"weight {name} must be nonnegative; {name}({bad}) < 0")

    @property
    def source(self) -> Optional[str]:
        return None if self.expression is None else self.expression.source

    def __call__(self, t):
        out = np.asarray(self._fn(np.asarray(t, dtype=float)), dtype=float)
        return np.broadcast_to(out, np.shape(t)).copy() if np.ndim(t) else float(out)

    def is_unit(self) -> bool:
        """True when the weight is identically 1 (enables closed forms)."""
        ts = np.linspace(0.0, 1.0, 257)
        return bool(np.all(self(ts) == 1.0))

    def __repr__(self):
        return f"WeightFunction({self.source or self._fn!r})"


UNIT_WEIGHT_SOURCE = "1"


def unit_weight() -> WeightFunction:
    return WeightFunction(UNIT_WEIGHT_SOURCE)
