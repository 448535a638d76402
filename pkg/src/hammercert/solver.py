"""Nystrom collocation of the nonlinear system and its fixed points.

Unknowns are the values of ``u`` and ``v`` at the Gauss nodes of a panel
grid whose edges include every fixed kink (``eta``, ``xi``, ``a_i``,
``b_i``).  ``T`` is applied with signed product-integration rows, so the
discrete map is exact for piecewise-polynomial integrands of the grid's
order.  Fixed points are sought by damped Picard iteration and Newton's
method from constant seeds placed between ladder levels.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import defaults
from .certificates import ProblemSpec, RadiiLadder
from .errors import ConvergenceError, SingularJacobianError, ValidationError
from .expr import ExpressionError
from .nystrom import PanelGrid, product_rows

_SAMPLES = 257
UNIFORM = np.linspace(0.0, 1.0, _SAMPLES)
GRADING_RATIO = 0.25
GRADING_FLOOR = 1e-8
_COND_LIMIT = 1e13
_STALL_STEPS = 5


@dataclass(frozen=True, eq=False)
class GridFunctionPair:
    """``(u, v)`` at the solver nodes, with norms and cone data on a dense sample."""

    nodes: np.ndarray
    u: np.ndarray
    v: np.ndarray
    norms: tuple
    mins: tuple
    residual: float
    cone: tuple
    sign_change: tuple
    uniform: np.ndarray = field(repr=False, default=None)  # (u, v) columns on a grid-independent sample
    grid: Optional[PanelGrid] = field(repr=False, default=None, compare=False)

    @property
    def norm(self) -> float:
        return max(self.norms)

    def distance(self, other: "GridFunctionPair") -> float:
        """Sup distance on the shared uniform sample, so pairs from different grids compare."""
        return float(np.max(np.abs(self.uniform - other.uniform)))

    def to_dict(self) -> dict:
        return {"norms": list(self.norms), "mins": list(self.mins), "residual": self.residual,
                "cone": list(self.cone), "sign_change": list(self.sign_change),
                "u0": float(self.u[0]), "v0": float(self.v[0])}


def graded_edges(points, width, ratio=GRADING_RATIO, floor=GRADING_FLOOR) -> list:
    """Panel edges accumulating geometrically at each point from both sides."""
    edges = []
    for p in points:
        edges.append(p)
        h = width
        while h > floor:
            edges += [p - h, p + h]
            h *= ratio
    return [e for e in edges if 0.0 < e < 1.0]


class HammersteinSystem:
    """The discretized map ``T`` of a :class:`ProblemSpec`."""

    def __init__(self, problem: ProblemSpec, n_panels=defaults.SOLVER_PANELS, order=defaults.QUAD_ORDER,
                 crossings=()):
        self.problem = problem
        self.n_panels = int(n_panels)
        self.crossings = tuple(sorted(float(c) for c in crossings))
        edges = [k.point for k in problem.kernels] + [x for iv in problem.intervals for x in iv]
        edges += graded_edges(self.crossings, 0.5 / self.n_panels)
        self.grid = PanelGrid.build(0.0, 1.0, self.n_panels, edges, order)
        self.nodes = self.grid.nodes
        self.B = tuple(self._rows(i, self.nodes) for i in (1, 2))
        self.samples = np.unique(np.concatenate([self.grid.extended_points(), np.linspace(0.0, 1.0, _SAMPLES)]))
        self._P = self.grid.interpolation_matrix(self.samples)
        self._U = self.grid.interpolation_matrix(UNIFORM)
        self._masks = tuple((self.samples >= a - 1e-15) & (self.samples <= b + 1e-15) for a, b in problem.intervals)

    @property
    def size(self) -> int:
        return self.nodes.size

    def _rows(self, i, t):
        k, g = self.problem.kernels[i - 1], self.problem.weights[i - 1]
        return product_rows(k.eval, k.breakpoints, g, self.grid, t)

    def _dt_rows(self, i, t):
        k, g = self.problem.kernels[i - 1], self.problem.weights[i - 1]
        return product_rows(k.eval_dt, lambda t_: [t_], g, self.grid, t)

    def f_values(self, u, v) -> tuple:
        out = []
        for i in (1, 2):
            f = self.problem.nonlinearities[i - 1]
            try:
                out.append(np.broadcast_to(np.asarray(f(t=self.nodes, u=u, v=v), dtype=float), u.shape))
            except ExpressionError as exc:
                raise ExpressionError(f"f_{i}: {exc} at node {self._bad_node(f, u, v)}") from exc
        return tuple(out)

    def _bad_node(self, f, u, v):
        for j, t in enumerate(self.nodes):
            try:
                f(t=t, u=u[j], v=v[j])
            except ExpressionError:
                return f"t = {float(t)!r} (u = {float(u[j])!r}, v = {float(v[j])!r})"
        return "unknown"

    def apply(self, u, v) -> tuple:
        f1, f2 = self.f_values(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        return self.B[0] @ f1, self.B[1] @ f2

    def value_at(self, i, u, v, t) -> np.ndarray:
        """``T_i(u, v)`` at arbitrary points ``t`` (the Nystrom interpolant)."""
        return self._rows(i, np.atleast_1d(t)) @ self.f_values(u, v)[i - 1]

    def derivative_at(self, i, u, v, t) -> np.ndarray:
        """``d/dt T_i(u, v)`` at arbitrary points ``t``."""
        return self._dt_rows(i, np.atleast_1d(t)) @ self.f_values(u, v)[i - 1]

    def residual(self, u, v) -> float:
        T1, T2 = self.apply(u, v)
        return float(max(np.max(np.abs(u - T1)), np.max(np.abs(v - T2))))

    def pair(self, u, v, residual: Optional[float] = None) -> GridFunctionPair:
        u = np.array(u, dtype=float)
        v = np.array(v, dtype=float)
        if residual is None:
            residual = self.residual(u, v)
        dense = (self._P @ u, self._P @ v)
        norms = tuple(float(np.max(np.abs(w))) for w in dense)
        mins = tuple(float(np.min(w[m])) for w, m in zip(dense, self._masks))
        cone = tuple(bool(mn >= c * nm - defaults.CONE_SLACK * max(1.0, nm))
                     for mn, nm, c in zip(mins, norms, self.problem.c))
        sign = tuple(bool(np.any(w > 0) and np.any(w < 0)) for w in dense)
        uniform = self._U @ np.column_stack([u, v])
        for arr in (u, v, uniform):
            arr.setflags(write=False)
        return GridFunctionPair(self.nodes, u, v, norms, mins, float(residual), cone, sign, uniform, self.grid)

    def constant(self, A1, A2) -> GridFunctionPair:
        return self.pair(np.full(self.size, float(A1)), np.full(self.size, float(A2)))

    def refined(self, factor=2) -> "HammersteinSystem":
        return HammersteinSystem(self.problem, self.n_panels * factor, self.grid.order, self.crossings)

    def sign_changes(self, x: GridFunctionPair) -> list:
        """Zero crossings in (0, 1) of both components of ``T(x)``."""
        f1, f2 = self.f_values(x.u, x.v)
        roots = []
        for i, fv in ((1, f1), (2, f2)):
            vals = self._rows(i, UNIFORM) @ fv
            for j in np.nonzero(vals[:-1] * vals[1:] < 0)[0]:
                fn = lambda t: float((self._rows(i, np.array([t])) @ fv)[0])
                roots.append(float(brentq(fn, UNIFORM[j], UNIFORM[j + 1], xtol=1e-15)))
        return sorted(roots)

    def adapted(self, x: GridFunctionPair) -> "HammersteinSystem":
        """Same problem with graded panels at the sign changes of ``x``."""
        return HammersteinSystem(self.problem, self.n_panels, self.grid.order, self.sign_changes(x))

    def transfer(self, x: GridFunctionPair, other: "HammersteinSystem") -> GridFunctionPair:
        """Carry ``x`` to another grid through the Nystrom interpolant ``T(x)``.

        Polynomial interpolation would smear the square-root behaviour that
        ``f`` may have where a component changes sign.
        """
        f1, f2 = self.f_values(x.u, x.v)
        return other.pair(self._rows(1, other.nodes) @ f1, self._rows(2, other.nodes) @ f2)


def apply_T(system: HammersteinSystem, x: GridFunctionPair) -> GridFunctionPair:
    return system.pair(*system.apply(x.u, x.v))


@dataclass
class SolveResult:
    pair: GridFunctionPair
    converged: bool
    iterations: int
    method: str
    message: str = ""
    trace: list = field(default_factory=list)

    @property
    def residual(self) -> float:
        return self.pair.residual


def _start(system, x0):
    if isinstance(x0, GridFunctionPair):
        return np.array(x0.u), np.array(x0.v)
    u0, v0 = x0
    return (np.broadcast_to(np.asarray(u0, dtype=float), (system.size,)).copy(),
            np.broadcast_to(np.asarray(v0, dtype=float), (system.size,)).copy())


def solve_picard(system: HammersteinSystem, x0, damping=defaults.PICARD_DAMPING, tol=defaults.PICARD_TOL,
                 max_iter=defaults.PICARD_MAX_ITER) -> SolveResult:
    """``x <- (1 - damping) x + damping T(x)`` until ``||x - T(x)|| <= tol``."""
    if not 0 < damping <= 1:
        raise ValidationError(f"damping must lie in (0, 1], got {damping}")
    u, v = _start(system, x0)
    T1, T2 = system.apply(u, v)
    trace = []
    for it in range(1, max_iter + 1):
        u = (1 - damping) * u + damping * T1
        v = (1 - damping) * v + damping * T2
        try:
            T1, T2 = system.apply(u, v)
        except ExpressionError as exc:
            res = trace[-1] if trace else math.inf
            return SolveResult(system.pair(u, v, res), False, it, "picard", f"diverged: {exc}", trace)
        res = float(max(np.max(np.abs(u - T1)), np.max(np.abs(v - T2))))
        trace.append(res)
        if not math.isfinite(res) or res > 1e12:
            return SolveResult(system.pair(u, v, res), False, it, "picard", "diverged", trace)
        if res <= tol * max(1.0, float(np.max(np.abs(u))), float(np.max(np.abs(v)))):
            return SolveResult(system.pair(u, v, res), True, it, "picard", "converged", trace)
    return SolveResult(system.pair(u, v, trace[-1]), False, max_iter, "picard",
                       f"no convergence in {max_iter} iterations (last residual {trace[-1]:.3e})", trace)


def _jacobian(system, u, v, fd_step):
    n = system.size
    h = fd_step * (1.0 + max(float(np.max(np.abs(u))), float(np.max(np.abs(v)))))
    f1, f2 = system.f_values(u, v)
    f1u, f2u = system.f_values(u + h, v)
    f1v, f2v = system.f_values(u, v + h)
    J = np.eye(2 * n)
    J[:n, :n] -= system.B[0] * ((f1u - f1) / h)[None, :]
    J[:n, n:] -= system.B[0] * ((f1v - f1) / h)[None, :]
    J[n:, :n] -= system.B[1] * ((f2u - f2) / h)[None, :]
    J[n:, n:] -= system.B[1] * ((f2v - f2) / h)[None, :]
    return J


def _F(system, u, v):
    T1, T2 = system.apply(u, v)
    return np.concatenate([u - T1, v - T2])


def solve_newton(system: HammersteinSystem, x0, tol=defaults.NEWTON_TOL, max_iter=defaults.NEWTON_MAX_ITER,
                 fd_step=defaults.FD_STEP) -> SolveResult:
    """Newton's method on ``x - T(x) = 0`` with a finite-difference Jacobian.

    ``f`` acts pointwise, so the Jacobian needs only two extra evaluations
    of each ``f_i``.  Steps are halved until the residual drops.  Raises
    :class:`SingularJacobianError` on a numerically singular Jacobian and
    :class:`ConvergenceError` after five steps without progress.
    """
    u, v = _start(system, x0)
    n = system.size
    F = _F(system, u, v)
    res = float(np.max(np.abs(F)))
    trace = [res]
    stall = 0
    for it in range(1, max_iter + 1):
        scale = max(1.0, float(np.max(np.abs(u))), float(np.max(np.abs(v))))
        if res <= tol * scale:
            return SolveResult(system.pair(u, v, res), True, it - 1, "newton", "converged", trace)
        J = _jacobian(system, u, v, fd_step)
        cond = float(np.linalg.cond(J))
        if not math.isfinite(cond) or cond > _COND_LIMIT:
            raise SingularJacobianError(f"singular Jacobian (condition estimate {cond:.3e})",
                                        system.pair(u, v, res), res, it)
        step = np.linalg.solve(J, -F)
        lam, accepted = 1.0, False
        while lam >= 1e-4:
            un, vn = u + lam * step[:n], v + lam * step[n:]
            try:
                Fn = _F(system, un, vn)
            except ExpressionError:
                lam /= 2
                continue
            rn = float(np.max(np.abs(Fn)))
            if math.isfinite(rn) and rn < res:
                accepted = True
                break
            lam /= 2
        if not accepted:
            stall += 1
            if stall >= _STALL_STEPS:
                raise ConvergenceError(f"residual not decreasing over {_STALL_STEPS} steps",
                                       system.pair(u, v, res), res, it)
            continue
        stall = 0
        u, v, F, res = un, vn, Fn, rn
        trace.append(res)
    scale = max(1.0, float(np.max(np.abs(u))), float(np.max(np.abs(v))))
    if res <= tol * scale:
        return SolveResult(system.pair(u, v, res), True, max_iter, "newton", "converged", trace)
    raise ConvergenceError(f"no convergence in {max_iter} Newton steps (residual {res:.3e})",
                           system.pair(u, v, res), res, max_iter)


# --- multistart -------------------------------------------------------------------------------


def seed_magnitudes(ladder: RadiiLadder, c: Sequence[float], per_shell=defaults.STARTS_PER_SHELL) -> list:
    """Constant seeds ``(A1, A2)`` between consecutive ladder levels, below the first and above the last."""
    levels = [np.asarray(lvl, dtype=float) for lvl in ladder.levels]
    c = np.asarray(c, dtype=float)
    bands = [(levels[0] / 4, levels[0])]
    bands += [(lo, hi) for lo, hi in zip(levels[:-1], levels[1:])]
    bands.append((levels[-1], levels[-1] / c))
    seeds = []
    for lo, hi in bands:
        for k in range(1, per_shell + 1):
            w = k / (per_shell + 1)
            seeds.append(tuple(float(x) for x in lo ** (1 - w) * hi**w))
    return seeds


@dataclass
class MultistartResult:
    solutions: list
    trivial_found: bool
    runs: list
    expected: Optional[int] = None
    rejected: list = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.expected is None or len(self.solutions) >= self.expected:
            return "found"
        return "not found numerically"


def _polish(system, x, report_tol, rounds=4):
    """Regrade the grid at the sign changes of ``x`` and re-solve until they settle.

    Returns ``(pair, system, consistency)`` where ``consistency`` is the sup
    distance to the Newton solution on the doubled grid, or ``None`` when a
    solve fails.
    """
    try:
        for _ in range(rounds):
            roots = system.sign_changes(x)
            old = system.crossings
            if len(roots) == len(old) and all(abs(p - q) <= 1e-13 for p, q in zip(roots, old)):
                break
            nxt = HammersteinSystem(system.problem, system.n_panels, system.grid.order, roots)
            res = solve_newton(nxt, system.transfer(x, nxt))
            if not res.converged:
                return None
            system, x = nxt, res.pair
        fine = system.refined()
        res = solve_newton(fine, system.transfer(x, fine))
    except (ConvergenceError, SingularJacobianError, ExpressionError):
        return None
    if not res.converged or res.residual > report_tol or x.residual > report_tol:
        return None
    return x, system, x.distance(res.pair)


def multistart(system: HammersteinSystem, ladder: RadiiLadder, starts_per_shell=defaults.STARTS_PER_SHELL,
               seeds=None, expected=None, picard_iter=200, report_tol=defaults.REPORT_RESIDUAL,
               dedupe_rel=defaults.DEDUPE_REL, consistency_tol=defaults.CONSISTENCY_TOL) -> MultistartResult:
    """Picard then Newton from every seed, keeping distinct converged pairs.

    Each seed is tried twice: Picard (polished by Newton when it converges)
    and Newton straight from the seed, since unstable fixed points are
    invisible to Picard.  Distinct candidates are then re-solved on a grid
    graded at their sign changes and checked against the doubled grid.
    """
    seeds = list(seeds) if seeds is not None else seed_magnitudes(ladder, system.problem.c, starts_per_shell)
    found, runs, trivial = [], [], False
    for seed in seeds:
        attempts = []
        pic = solve_picard(system, seed, max_iter=picard_iter)
        attempts.append(("picard", pic))
        starts = [pic.pair] if pic.converged else []
        starts.append(seed)
        for start in starts:
            try:
                attempts.append(("newton", solve_newton(system, start)))
            except (ConvergenceError, ExpressionError) as exc:
                runs.append({"seed": list(seed), "method": "newton", "converged": False, "message": str(exc)})
        for method, res in attempts:
            runs.append({"seed": list(seed), "method": method, "converged": res.converged,
                         "residual": res.residual, "iterations": res.iterations})
            if not res.converged or res.residual > report_tol:
                continue
            if res.pair.norm <= defaults.TRIVIAL_TOL:
                trivial = True
                continue
            found.append(res.pair)

    def distinct(pairs):
        out = []
        for x in sorted(pairs, key=lambda p: (p.residual, p.norm)):
            tol = dedupe_rel * max([x.norm] + [y.norm for y in out])
            if all(x.distance(y) >= tol for y in out):
                out.append(x)
        return out

    polished, rejected = [], []
    for x in distinct(found):
        ok = _polish(system, x, report_tol)
        if ok is None or ok[2] > consistency_tol:
            rejected.append({"norms": list(x.norms), "consistency": None if ok is None else ok[2]})
            continue
        polished.append(ok[0])
    solutions = sorted(distinct(polished), key=lambda p: p.norm)
    return MultistartResult(solutions, trivial, runs, expected, rejected)


# --- localization -------------------------------------------------------------------------------


def localize(x: GridFunctionPair, ladder: RadiiLadder, shells: Sequence[dict] = ()) -> dict:
    """Membership of ``x`` in ``K`` and ``V`` at each ladder level and in the given shells."""
    levels = {}
    for name, (r1, r2) in zip(ladder.names, ladder.levels):
        levels[name] = {
            "in_K": x.norms[0] < r1 and x.norms[1] < r2,
            "in_closed_K": x.norms[0] <= r1 and x.norms[1] <= r2,
            "in_V": x.mins[0] < r1 and x.mins[1] < r2,
            "in_closed_V": x.mins[0] <= r1 and x.mins[1] <= r2,
            "on_boundary_V": (x.mins[0] <= r1 and x.mins[1] <= r2)
            and (math.isclose(x.mins[0], r1, rel_tol=1e-12) or math.isclose(x.mins[1], r2, rel_tol=1e-12)),
        }
    inside = []
    for sh in shells:
        if "outer" not in sh:
            continue
        o = levels[sh["outer_level"]]["in_K" if sh["outer"] == "K" else "in_V"]
        i = levels[sh["inner_level"]]["in_closed_K" if sh["inner"] == "K" else "in_closed_V"]
        if o and not i:
            inside.append(sh["text"])
    return {"norms": list(x.norms), "mins": list(x.mins), "cone": list(x.cone),
            "sign_change": list(x.sign_change), "levels": levels, "shells": inside}


# --- output ---------------------------------------------------------------------------------------


def write_solution_csv(path, x: GridFunctionPair):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "u", "v"])
        for row in zip(x.nodes, x.u, x.v):
            w.writerow([repr(float(val)) for val in row])


def write_profile_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u", "v"])
        for row in rows:
            w.writerow([repr(float(val)) for val in row])


def interpolant(x: GridFunctionPair, i: int):
    """Vectorized callable ``t -> `` panel interpolant of component ``i`` of ``x``."""
    values = x.u if i == 1 else x.v
    return lambda t: x.grid.interpolate(values, np.atleast_1d(np.asarray(t, dtype=float)))
