"""Radial reduction of the annular system to the unit interval.

A radial function on ``R1 <= |x| <= R0`` becomes a function of
``t in [0, 1]`` through a decreasing map ``r(t)`` with ``r(0) = R0`` and
``r(1) = R1``; the radial Laplacian turns into ``w''(t)`` times the weight
``phi(t) = r'(t)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import defaults
from .errors import ValidationError
from .expr import Expression
from .kernels import WeightFunction

PHI_MODES = ("derived", "paper_printed")


def _num(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class Substitution:
    """The map ``r(t)`` and the weight ``phi(t)`` for one annulus."""

    n: int
    R1: float
    R0: float
    phi_mode: str = "derived"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"space dimension must be an integer >= 2, got {self.n}")
        if not 0 < self.R1 < self.R0:
            raise ValidationError(f"need 0 < R1 < R0, got R1 = {self.R1}, R0 = {self.R0}")
        if self.phi_mode not in PHI_MODES:
            raise ValidationError(f"phi mode must be one of {PHI_MODES}, got {self.phi_mode!r}")
        if self.phi_mode == "paper_printed" and self.n != 2:
            raise ValidationError("the paper_printed weight exists only for n = 2")

    @property
    def gamma(self) -> float:
        return self.R0 ** (-(self.n - 2))

    @property
    def beta(self) -> float:
        return self.R1 ** (-(self.n - 2))

    # sources double as documentation in reports and let weights stay expressions
    @property
    def r_source(self) -> str:
        if self.n == 2:
            return f"{_num(self.R0)}^(1 - t)*{_num(self.R1)}^t"
        return f"({_num(self.gamma)} + {_num(self.beta - self.gamma)}*t)^(-1/{self.n - 2})"

    @property
    def phi_source(self) -> str:
        if self.n == 2:
            L = _num(math.log(self.R0 / self.R1))
            if self.phi_mode == "paper_printed":
                return f"({_num(self.R0)}*(1 - t)*{L})^2"
            return f"{L}^2*({self.r_source})^2"
        k = (self.beta - self.gamma) / (self.n - 2)
        return f"{_num(k * k)}*({_num(self.gamma)} + {_num(self.beta - self.gamma)}*t)^(-{2 * (self.n - 1)}/{self.n - 2})"

    def r(self, t):
        t = np.asarray(t, dtype=float)
        if self.n == 2:
            out = self.R0 ** (1.0 - t) * self.R1**t
        else:
            out = (self.gamma + (self.beta - self.gamma) * t) ** (-1.0 / (self.n - 2))
        return out if out.ndim else float(out)

    def dr(self, t):
        """``r'(t)``."""
        t = np.asarray(t, dtype=float)
        if self.n == 2:
            out = -math.log(self.R0 / self.R1) * self.r(t)
        else:
            d = self.beta - self.gamma
            out = -d / (self.n - 2) * (self.gamma + d * t) ** (-1.0 / (self.n - 2) - 1.0)
        return out if np.ndim(out) else float(out)

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        if self.n == 2:
            L = math.log(self.R0 / self.R1)
            out = (self.R0 * (1.0 - t) * L) ** 2 if self.phi_mode == "paper_printed" else L**2 * self.r(t) ** 2
        else:
            d = self.beta - self.gamma
            out = (d / (self.n - 2)) ** 2 * (self.gamma + d * t) ** (-2.0 * (self.n - 1) / (self.n - 2))
        return out if np.ndim(out) else float(out)

    def t_of(self, radius, tol=defaults.BISECTION_TOL) -> float:
        """Invert ``r`` on [0, 1] by bracketed root finding."""
        radius = float(radius)
        if not self.R1 <= radius <= self.R0:
            raise ValidationError(f"radius {radius} outside [{self.R1}, {self.R0}]")
        if radius == self.R0:
            return 0.0
        if radius == self.R1:
            return 1.0
        return float(brentq(lambda t: self.r(t) - radius, 0.0, 1.0, xtol=tol, rtol=4 * np.finfo(float).eps))


def substitution(n: int, R1: float, R0: float, phi_mode: str = "derived") -> Substitution:
    return Substitution(n, float(R1), float(R0), phi_mode)


@dataclass(frozen=True)
class AnnulusSpec:
    """Annular system data: dimension, radii, weights ``h_i(r)`` and boundary data.

    ``alpha1`` pairs with ``w(R1) = alpha1 * w(R_eta)`` and ``alpha2`` with
    ``w(R1) = alpha2 * dw/dr(R_xi)``.
    """

    n: int
    R1: float
    R0: float
    h: tuple = ("1", "1")
    alpha1: float = -1.0
    alpha2: float = 0.25
    R_eta: float = None
    R_xi: float = None
    phi_mode: str = "derived"
    h_expr: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        subst = substitution(self.n, self.R1, self.R0, self.phi_mode)
        exprs = tuple(hi if isinstance(hi, Expression) else Expression(str(hi), ("r",)) for hi in self.h)
        if len(exprs) != 2:
            raise ValidationError("an annulus needs two weights h_1, h_2")
        object.__setattr__(self, "h_expr", exprs)
        for name in ("R_eta", "R_xi"):
            val = getattr(self, name)
            if val is not None and not self.R1 < val < self.R0:
                raise ValidationError(f"{name} = {val} must lie strictly between R1 = {self.R1} and R0 = {self.R0}")
        object.__setattr__(self, "_subst", subst)

    @property
    def subst(self) -> Substitution:
        return self._subst


@dataclass(frozen=True)
class ReducedData:
    g: tuple
    eta: float
    xi: float
    alpha1: float
    alpha2: float
    phi_mode: str
    notes: tuple = ()

    def to_dict(self) -> dict:
        return {"weights": [g.source for g in self.g], "eta": self.eta, "xi": self.xi,
                "alpha1": self.alpha1, "alpha2": self.alpha2, "phi_mode": self.phi_mode,
                "notes": list(self.notes)}


def weight_expression(a: AnnulusSpec, i: int) -> Expression:
    """``g_i(t) = phi(t) * h_i(r(t))`` as an expression in ``t``."""
    s = a.subst
    r_expr = Expression(s.r_source, ("t",))
    h_t = a.h_expr[i - 1].substitute("r", r_expr, ("t",))
    return Expression(f"({s.phi_source})*({h_t.source})", ("t",))


def build_weights(a: AnnulusSpec, mode: str = None) -> ReducedData:
    """Weights and boundary parameters of the reduced problem on [0, 1]."""
    if mode is not None and mode != a.phi_mode:
        a = AnnulusSpec(a.n, a.R1, a.R0, a.h, a.alpha1, a.alpha2, a.R_eta, a.R_xi, mode)
    s = a.subst
    g = tuple(WeightFunction(weight_expression(a, i), f"g{i}") for i in (1, 2))
    eta = s.t_of(a.R_eta) if a.R_eta is not None else None
    xi = s.t_of(a.R_xi) if a.R_xi is not None else None
    notes = [f"phi mode: {a.phi_mode}"]
    if a.phi_mode == "paper_printed":
        notes.append("paper_printed weight (R0 (1 - t) log(R0/R1))^2 differs from the chain-rule weight r'(t)^2")
    if xi is not None:
        notes.append(
            f"alpha2 = {a.alpha2} passed through unchanged; dw/dt = r'(t) dw/dr, so the t-variable "
            f"coefficient would be alpha2 / r'(xi) = {a.alpha2 / s.dr(xi)!r}"
        )
    return ReducedData(g, eta, xi, a.alpha1, a.alpha2, a.phi_mode, tuple(notes))


def pull_back(u, a, samples: int = 101) -> np.ndarray:
    """Rows ``(radius, u(t(radius)))`` on an increasing radius grid from ``R1`` to ``R0``.

    ``u`` is a vectorized callable on [0, 1] (or a list of them, giving one
    value column each); ``a`` is an :class:`AnnulusSpec` or a
    :class:`Substitution`.
    """
    s = a.subst if isinstance(a, AnnulusSpec) else a
    if samples < 2:
        raise ValidationError("pull_back needs at least two samples")
    radii = np.linspace(s.R1, s.R0, samples)
    ts = np.array([s.t_of(x) for x in radii])
    funcs = u if isinstance(u, (list, tuple)) else [u]
    cols = [np.broadcast_to(np.asarray(fn(ts), dtype=float), ts.shape) for fn in funcs]
    return np.column_stack([radii] + cols)
