"""Sampled certificates for the index conditions and the multiplicity verdict.

Every sup or inf over a ``(t, u, v)`` box is taken on a deterministic tensor
grid with one local refinement pass.  A verdict is therefore a *sampled*
certificate at a stated density, not a proof; reports say so.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import defaults
from .bounds import closed_form_m, compute_M, compute_m, compute_m_refined
from .errors import NonnegativityError, ValidationError
from .expr import Expression
from .kernels import KernelSpec, WeightFunction
from .spectral import OperatorSpectra, phi_weighted_mass, resolvent_bound_R0

REFINE_POINTS = 17
LEVEL_NAMES = ("rho", "r", "s", "sigma")
_NOISE = 8 * np.finfo(float).eps


# --- problem data -----------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """Two kernels, two weights and two nonlinearities ``f_i(t, u, v) >= 0``."""

    kernels: tuple
    weights: tuple
    nonlinearities: tuple
    name: str = "problem"

    def __post_init__(self):
        for field_name in ("kernels", "weights", "nonlinearities"):
            if len(getattr(self, field_name)) != 2:
                raise ValidationError(f"{field_name} must have exactly two entries")
        f = tuple(fi if isinstance(fi, Expression) else Expression(str(fi), ("t", "u", "v"))
                  for fi in self.nonlinearities)
        object.__setattr__(self, "nonlinearities", f)

    @property
    def intervals(self) -> tuple:
        return tuple(k.interval for k in self.kernels)

    @property
    def c(self) -> tuple:
        return tuple(k.c for k in self.kernels)

    def same_interval(self) -> bool:
        (a1, b1), (a2, b2) = self.intervals
        return abs(a1 - a2) <= 1e-14 and abs(b1 - b2) <= 1e-14

    def f(self, i: int, t, u, v):
        """``f_i`` for ``i`` in {1, 2}, broadcasting its arguments."""
        return self.nonlinearities[i - 1](t=t, u=u, v=v)


@dataclass(frozen=True)
class RadiiLadder:
    """Ordered radii levels, each a pair ``(x_1, x_2)``; names default to rho, r, s, sigma."""

    levels: tuple
    names: tuple = ()

    def __post_init__(self):
        levels = tuple((float(a), float(b)) for a, b in self.levels)
        if not levels:
            raise ValidationError("a radii ladder needs at least one level")
        if any(x <= 0 for lvl in levels for x in lvl):
            raise ValidationError("all radii must be positive")
        names = tuple(self.names) or LEVEL_NAMES[: len(levels)]
        if len(names) != len(levels):
            raise ValidationError("ladder names and levels differ in length")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RadiiLadder":
        names = [n for n in LEVEL_NAMES if n in mapping] + [n for n in mapping if n not in LEVEL_NAMES]
        return cls(tuple(tuple(mapping[n]) for n in names), tuple(names))

    def __getitem__(self, name):
        return self.levels[self.names.index(name)]

    def to_dict(self) -> dict:
        return {n: list(v) for n, v in zip(self.names, self.levels)}


# --- box extrema --------------------------------------------------------------------


def _axis(lo, hi, n):
    lo, hi = float(lo), float(hi)
    if hi < lo:
        raise ValidationError(f"empty range [{lo}, {hi}]")
    if hi == lo:
        return np.array([lo])
    pts = np.linspace(lo, hi, n)
    if lo < 0.0 < hi:
        pts = np.union1d(pts, [0.0])
    return pts


def _eval_box(f, ts, us, vs):
    vals = f(t=ts[:, None, None], u=us[None, :, None], v=vs[None, None, :])
    vals = np.broadcast_to(np.asarray(vals, dtype=float), (ts.size, us.size, vs.size))
    if not np.all(np.isfinite(vals)):
        raise ValidationError("nonlinearity is not finite on the sampling box")
    if np.any(vals < 0):
        i, j, k = np.unravel_index(int(np.argmin(vals)), vals.shape)
        raise NonnegativityError(
            f"nonnegativity violated: f({ts[i]!r}, {us[j]!r}, {vs[k]!r}) = {vals[i, j, k]!r} < 0"
        )
    return vals


def box_extremum(f, t_range, u_range, v_range, mode="sup", density=defaults.BOX_DENSITY) -> tuple:
    """``(value, (t, u, v))`` of the sup or inf of ``f`` over a box.

    Tensor grid of ``density`` points per axis (0 added on axes straddling
    it), then one refinement grid over the cells around the best point.
    Ties keep the first point in ``(t, u, v)`` lexicographic order.
    """
    if mode not in ("sup", "inf"):
        raise ValueError(f"mode must be 'sup' or 'inf', got {mode!r}")
    if density < 8:
        raise ValidationError(f"box density must be at least 8, got {density}")
    sign = 1.0 if mode == "sup" else -1.0
    axes = [_axis(*r, density) for r in (t_range, u_range, v_range)]
    vals = sign * _eval_box(f, *axes)
    idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
    best = float(vals[idx])
    point = tuple(float(ax[i]) for ax, i in zip(axes, idx))

    fine = []
    for ax, i in zip(axes, idx):
        if ax.size == 1:
            fine.append(ax)
        else:
            fine.append(np.linspace(ax[max(i - 1, 0)], ax[min(i + 1, ax.size - 1)], REFINE_POINTS))
    fvals = sign * _eval_box(f, *fine)
    fidx = np.unravel_index(int(np.argmax(fvals)), fvals.shape)
    if fvals[fidx] > best + _NOISE * max(1.0, abs(best)):
        best = float(fvals[fidx])
        point = tuple(float(ax[i]) for ax, i in zip(fine, fidx))
    return sign * best, point


# --- condition records ----------------------------------------------------------------


@dataclass
class ConditionRecord:
    """Outcome of one hypothesis at one set of radii.

    ``computed``, ``threshold`` and ``margin`` describe the deciding
    component: the worst one when every component must pass, the best one
    when a single component suffices.
    """

    id: str
    computed: float
    threshold: float
    margin: float
    density: int
    verdict: bool
    radii: tuple = ()
    level: Optional[str] = None
    components: list = field(default_factory=list)
    witness: Optional[tuple] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["radii"] = list(self.radii)
        d["witness"] = None if self.witness is None else list(self.witness)
        return _jsonable(d)

    @classmethod
    def from_dict(cls, d: dict) -> "ConditionRecord":
        d = dict(d)
        d["radii"] = tuple(d.get("radii", ()))
        if d.get("witness") is not None:
            d["witness"] = tuple(d["witness"])
        return cls(**d)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _strict(margin, tol):
    return bool(margin >= tol)


def _component(i, box, value, point, ratio, threshold, margin, tol):
    return {
        "i": i,
        "box": [list(map(float, r)) for r in box],
        "extremum": value,
        "ratio": ratio,
        "threshold": threshold,
        "margin": margin,
        "witness": list(point),
        "verdict": _strict(margin, tol),
    }


def _record(cid, comps, need_all, density, radii, level, tol, extra=None):
    key = lambda c: c["margin"]
    decisive = min(comps, key=key) if need_all else max(comps, key=key)
    verdict = all(c["verdict"] for c in comps) if need_all else any(c["verdict"] for c in comps)
    return ConditionRecord(cid, decisive["ratio"], decisive["threshold"], decisive["margin"], density,
                           verdict, tuple(radii), level, comps, tuple(decisive["witness"]), extra or {})


def check_I1(p: ProblemSpec, rho1, rho2, m1, m2, density=defaults.BOX_DENSITY,
             tol=defaults.STRICTNESS_TOL, level=None, refined=False) -> ConditionRecord:
    """Index 1 on ``K_rho``: ``sup f_i / rho_i < m_i`` on ``[0,1] x [-rho1,rho1] x [-rho2,rho2]``."""
    rho, m = (rho1, rho2), (m1, m2)
    box = ((0.0, 1.0), (-rho1, rho1), (-rho2, rho2))
    comps = []
    for i in (1, 2):
        val, pt = box_extremum(p.nonlinearities[i - 1], *box, "sup", density)
        ratio = val / rho[i - 1]
        comps.append(_component(i, box, val, pt, ratio, m[i - 1], m[i - 1] - ratio, tol))
    return _record("I1_refined" if refined else "I1", comps, True, density, rho, level, tol)


def _I0_boxes(p, rho1, rho2, variant):
    (a1, b1), (a2, b2) = p.intervals
    c1, c2 = p.c
    U, V = rho1 / c1, rho2 / c2
    if variant == "I0":
        return [((a1, b1), (rho1, U), (-V, V)), ((a2, b2), (-U, U), (rho2, V))]
    if variant == "I0_star":
        return [((a1, b1), (0.0, U), (-V, V)), ((a2, b2), (-U, U), (0.0, V))]
    if variant == "I0_underline":
        return [((a1, b1), (rho1, U), (0.0, V)), ((a1, b1), (0.0, U), (rho2, V))]
    if variant == "I0_underline_star":
        return [((a1, b1), (0.0, U), (0.0, V))] * 2
    raise ValueError(variant)


def _check_I0_variant(p, variant, rho1, rho2, M1, M2, density, tol, level):
    if variant.startswith("I0_underline") and not p.same_interval():
        raise ValidationError(
            f"intervals differ: {p.intervals[0]} vs {p.intervals[1]}; underlined conditions need equal intervals"
        )
    rho, M = (rho1, rho2), (M1, M2)
    comps = []
    for i, box in zip((1, 2), _I0_boxes(p, rho1, rho2, variant)):
        val, pt = box_extremum(p.nonlinearities[i - 1], *box, "inf", density)
        ratio = val / rho[i - 1]
        comps.append(_component(i, box, val, pt, ratio, M[i - 1], ratio - M[i - 1], tol))
    need_all = not variant.endswith("star")
    return _record(variant, comps, need_all, density, rho, level, tol)


def check_I0(p, rho1, rho2, M1, M2, density=defaults.BOX_DENSITY, tol=defaults.STRICTNESS_TOL, level=None):
    """Index 0 on ``V_rho``: ``inf f_i / rho_i > M_i`` for both components."""
    return _check_I0_variant(p, "I0", rho1, rho2, M1, M2, density, tol, level)


def check_I0_star(p, rho1, rho2, M1, M2, density=defaults.BOX_DENSITY, tol=defaults.STRICTNESS_TOL, level=None):
    """Like :func:`check_I0` with the controlled variable starting at 0; one component suffices."""
    return _check_I0_variant(p, "I0_star", rho1, rho2, M1, M2, density, tol, level)


def check_I0_underline(p, rho1, rho2, M1, M2, star=False, density=defaults.BOX_DENSITY,
                       tol=defaults.STRICTNESS_TOL, level=None):
    """Variants for equal intervals, where the other variable may be taken nonnegative."""
    variant = "I0_underline_star" if star else "I0_underline"
    return _check_I0_variant(p, variant, rho1, rho2, M1, M2, density, tol, level)


# --- non-existence ------------------------------------------------------------------------


def _ratio_axis(cap, density, positive_only):
    base = np.linspace(0.0, cap, density)[1:]
    small = cap * np.logspace(-6, -1, density // 2)
    pos = np.union1d(base, small)
    return pos if positive_only else np.concatenate([-pos[::-1], pos])


def _ratio_extremum(f, i, ts, ui, other, mode, which):
    """sup or inf of ``f / |u_i|`` over a grid; ``ui`` excludes 0."""
    if i == 1:
        vals = _eval_box(f, ts, ui, other)
        denom = np.abs(ui)[None, :, None] if which == "abs" else ui[None, :, None]
    else:
        vals = _eval_box(f, ts, other, ui)
        denom = np.abs(ui)[None, None, :] if which == "abs" else ui[None, None, :]
    q = vals / denom
    k = int(np.argmax(q)) if mode == "sup" else int(np.argmin(q))
    a, b, c = np.unravel_index(k, q.shape)
    pt = (float(ts[a]), float((ui if i == 1 else other)[b]), float((other if i == 1 else ui)[c]))
    return float(q.flat[k]), pt


def check_nonexistence(p: ProblemSpec, m1, m2, M1, M2, cap=1e2, density=defaults.BOX_DENSITY,
                       tol=defaults.STRICTNESS_TOL) -> ConditionRecord:
    """Which of the non-existence conditions holds on ``|u|, |v| <= cap``.

    ``cond1``: ``f_i < m_i |u_i|`` for ``u_i != 0`` and both ``i``;
    ``cond2``: ``f_i > M_i u_i`` on ``[a_i, b_i]`` for ``u_i > 0`` and both ``i``;
    ``mixed``: one component of each kind.
    """
    m, M = (m1, m2), (M1, M2)
    ts_full = np.linspace(0.0, 1.0, density)
    comps = []
    for i in (1, 2):
        f = p.nonlinearities[i - 1]
        a, b = p.intervals[i - 1]
        sym = _ratio_axis(cap, density, False)
        other = _axis(-cap, cap, density)
        sup1, w1 = _ratio_extremum(f, i, ts_full, sym, other, "sup", "abs")
        inf2, w2 = _ratio_extremum(f, i, np.linspace(a, b, density), _ratio_axis(cap, density, True), other, "inf", "signed")
        comps.append({
            "i": i,
            "cond1": {"sup_ratio": sup1, "threshold": m[i - 1], "margin": m[i - 1] - sup1,
                      "witness": list(w1), "verdict": _strict(m[i - 1] - sup1, tol)},
            "cond2": {"inf_ratio": inf2, "threshold": M[i - 1], "margin": inf2 - M[i - 1],
                      "witness": list(w2), "verdict": _strict(inf2 - M[i - 1], tol)},
        })
    c1 = [c["cond1"]["verdict"] for c in comps]
    c2 = [c["cond2"]["verdict"] for c in comps]
    if all(c1):
        kind = "cond1"
    elif all(c2):
        kind = "cond2"
    elif (c1[0] and c2[1]) or (c2[0] and c1[1]):
        kind = "mixed"
    else:
        kind = "none"
    best = [max(c["cond1"]["margin"], c["cond2"]["margin"]) for c in comps]
    j = int(np.argmin(best))
    deciding = comps[j]["cond1"] if comps[j]["cond1"]["margin"] >= comps[j]["cond2"]["margin"] else comps[j]["cond2"]
    computed = deciding.get("sup_ratio", deciding.get("inf_ratio"))
    return ConditionRecord("nonexistence", computed, deciding["threshold"], best[j], density,
                           kind != "none", (cap, cap), None, comps, tuple(deciding["witness"]),
                           {"classification": kind, "cap": cap})


# --- eigenvalue criteria ----------------------------------------------------------------------

EIGEN_KINDS = ("I0_0plus", "I0_inf", "I1_0plus", "I1_inf")


def _eps_verdict(delta, mu, eps, tol):
    """Choose or validate eps against the observed ratio margin ``delta``."""
    if eps is None:
        eps = delta / 2 if math.isfinite(delta) and delta > 0 else 0.0
    ok = eps >= defaults.EIGEN_EPS_REL * mu and delta - eps >= -tol and eps > 0
    return float(eps), bool(ok)


def _quadrant_axes(lo, cap, density):
    pos = np.linspace(lo, cap, density)
    return np.concatenate([-pos[::-1], pos])


def check_eigen_conditions(p: ProblemSpec, spectra: Sequence[OperatorSpectra], which: str, radius: float,
                           eps=None, cap=None, density=defaults.BOX_DENSITY,
                           tol=defaults.STRICTNESS_TOL) -> ConditionRecord:
    """Eigenvalue-comparison conditions, sampled.

    ``radius`` is ``rho_0`` for the ``0plus`` kinds and ``R_1`` for the
    ``inf`` kinds, whose unbounded ranges stop at ``cap`` (default
    ``CAP_FACTOR * R_1``).  Margins are in ratio form, ``inf f_i/u_i - mu``
    or ``mu - sup f_i/|u_i|``; ``eps`` defaults to half the observed margin.
    """
    if which not in EIGEN_KINDS:
        raise ValidationError(f"unknown eigenvalue condition {which!r}; expected one of {EIGEN_KINDS}")
    R = float(radius)
    if not R > 0:
        raise ValidationError("radius must be positive")
    cap = defaults.CAP_FACTOR * R if cap is None else float(cap)
    extra = {"radius": R, "cap": cap if which.endswith("inf") else None,
             "note": "finite-box form of the eigenvalue condition; asymptotic limits are not sampled"}
    eps_in = eps if (eps is None or np.ndim(eps)) else (eps, eps)
    comps = []
    for i in (1, 2):
        f = p.nonlinearities[i - 1]
        a, b = p.intervals[i - 1]
        spec = spectra[i - 1]
        e_i = None if eps_in is None else float(eps_in[i - 1])
        if which.startswith("I0"):
            mu = spec.L_plus.mu
            ts = np.linspace(a, b, density)
            if which == "I0_0plus":
                ui = np.linspace(0.0, R, density)[1:]
                other = _axis(-R, R, density)
            else:
                ui = np.linspace(p.c[i - 1] * R, cap, density)
                other = _axis(-cap, cap, density)
            q, pt = _ratio_extremum(f, i, ts, ui, other, "inf", "signed")
            delta = q - mu
        else:
            mu = spec.L.mu
            ts = np.linspace(0.0, 1.0, density)
            if which == "I1_0plus":
                ui = _ratio_axis(R, density, False)
                other = _axis(-R, R, density)
                zero = _eval_box(f, ts, np.array([0.0]), other) if i == 1 else _eval_box(f, ts, other, np.array([0.0]))
            else:
                ui = _quadrant_axes(R, cap, density)
                other = ui
                zero = np.zeros(1)
            q, pt = _ratio_extremum(f, i, ts, ui, other, "sup", "abs")
            delta = mu - q if not np.any(zero > 0) else -math.inf
        e_i, ok = _eps_verdict(delta, mu, e_i, tol)
        comps.append({"i": i, "mu": mu, "ratio": q, "threshold": mu, "observed_margin": delta, "eps": e_i,
                      "margin": delta - e_i, "witness": list(pt), "verdict": ok})
    need_all = which != "I0_0plus"
    rec = _record(which, comps, need_all, density, (R, R), None, tol, extra)
    if which == "I1_inf" and rec.verdict:
        rec.extra["R0"] = _I1_inf_R0(p, spectra, comps, cap, density)
    return rec


def _I1_inf_R0(p, spectra, comps, cap, density):
    """``R_0`` from the resolvent bound with ``phi_i(t) = sup (f_i - (mu_i - eps_i)|u_i|)^+``.

    The supremum runs over the whole capped box, so the bound
    ``f_i <= (mu_i - eps_i)|u_i| + phi_i`` holds at every sampled point.
    """
    mats, mus, epss, Cs = [], [], [], []
    uv = _axis(-cap, cap, density)
    for i, comp in zip((1, 2), comps):
        A = spectra[i - 1].matrices["L"]
        lam = comp["mu"] - comp["eps"]
        ts = A.nodes
        vals = _eval_box(p.nonlinearities[i - 1], ts, uv, uv)
        lin = lam * np.abs(uv)
        excess = vals - (lin[None, :, None] if i == 1 else lin[None, None, :])
        phi = np.max(np.maximum(excess, 0.0), axis=(1, 2))
        Cs.append(phi_weighted_mass(p.kernels[i - 1], p.weights[i - 1], phi, A.grid))
        mats.append(A)
        mus.append(comp["mu"])
        epss.append(comp["eps"])
    return resolvent_bound_R0(mats, mus, epss, Cs)


# --- constants ------------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemConstants:
    c: tuple
    m: tuple
    m_refined: tuple
    M: tuple
    intervals: tuple
    witnesses: dict
    closed_form_m: tuple = (None, None)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def problem_constants(p: ProblemSpec, tol=defaults.INTEGRATE_TOL) -> ProblemConstants:
    ms, mr, Ms, cf, wit = [], [], [], [], {}
    for i, (k, g) in enumerate(zip(p.kernels, p.weights), start=1):
        r_m = compute_m(k, g, tol)
        r_r = compute_m_refined(k, g, tol)
        r_M = compute_M(k, g, k.a, k.b, tol)
        ms.append(r_m.value)
        mr.append(r_r.value)
        Ms.append(r_M.value)
        cf.append(closed_form_m(k).value if g.is_unit() else None)
        wit[f"m{i}"], wit[f"m{i}_refined"], wit[f"M{i}"] = r_m.witness_t, r_r.witness_t, r_M.witness_t
    return ProblemConstants(p.c, tuple(ms), tuple(mr), tuple(Ms), p.intervals, wit, tuple(cf))


# --- verdict ----------------------------------------------------------------------------------

# Each case lists (kind, star allowed) per level and the ordering between consecutive levels:
# "c" means x_i / c_i < y_i, "<" means x_i < y_i.
CASES = {
    "S1": ((("V0", True), ("K1", False)), ("c",), 1),
    "S2": ((("K1", False), ("V0", False)), ("<",), 1),
    "S3": ((("V0", True), ("K1", False), ("V0", False)), ("c", "<"), 2),
    "S4": ((("K1", False), ("V0", False), ("K1", False)), ("<", "c"), 2),
    "S5": ((("V0", True), ("K1", False), ("V0", False), ("K1", False)), ("c", "<", "c"), 3),
    "S6": ((("K1", False), ("V0", False), ("K1", False), ("V0", False)), ("<", "c", "<"), 3),
}
_WORDS = {1: "at least one nontrivial solution", 2: "at least two nontrivial solutions",
          3: "at least three nontrivial solutions"}


def _level_holds(records, level, kind, star):
    ids = {"K1": ("I1", "I1_refined"), "V0": ("I0", "I0_underline")}[kind]
    if kind == "V0" and star:
        ids = ids + ("I0_star", "I0_underline_star")
    used = [r.id for r in records if r.level == level and r.id in ids and r.verdict]
    return used


def _ordering_ok(x, y, rel, c):
    if rel == "c":
        return all(x[i] / c[i] < y[i] for i in range(2))
    return all(x[i] < y[i] for i in range(2))


def _shell(kind_lo, name_lo, kind_hi, name_hi):
    """A solution lies in the outer set minus the closure of the inner one."""
    inner = "K" if kind_lo == "K1" else "V"
    outer = "K" if kind_hi == "K1" else "V"
    return {"outer": outer, "outer_level": name_hi, "inner": inner, "inner_level": name_lo,
            "text": f"{outer}[{name_hi}] minus closure of {inner}[{name_lo}]"}


def conclude(p: ProblemSpec, ladder: RadiiLadder, records: Sequence[ConditionRecord]) -> dict:
    """Match verdicts and radii orderings against the multiplicity cases."""
    c = p.c
    matches, diagnostics = [], []
    n = len(ladder.levels)
    for case, (kinds, rels, count) in CASES.items():
        for combo in itertools.combinations(range(n), len(kinds)):
            names = [ladder.names[j] for j in combo]
            used = [_level_holds(records, nm, kind, star) for nm, (kind, star) in zip(names, kinds)]
            if not all(used):
                continue
            bad = [f"{names[k]} -> {names[k + 1]} ({'x/c < y' if rel == 'c' else 'x < y'})"
                   for k, rel in enumerate(rels)
                   if not _ordering_ok(ladder[names[k]], ladder[names[k + 1]], rel, c)]
            if bad:
                diagnostics.append(f"{case} rejected at levels {names}: ordering violated for " + ", ".join(bad))
                continue
            shells = [_shell(kinds[k][0], names[k], kinds[k + 1][0], names[k + 1]) for k in range(len(kinds) - 1)]
            matches.append({"case": case, "count": count, "levels": names,
                            "conditions": [u[0] for u in used], "shells": shells})

    eig = {r.id: r for r in records if r.id in EIGEN_KINDS and r.verdict}
    if "I1_0plus" in eig and "I0_inf" in eig:
        matches.append({"case": "E1", "count": 1, "levels": [], "conditions": ["I1_0plus", "I0_inf"],
                        "shells": [{"text": "K[R] minus closure of K[rho] for small rho and R >= R1"}]})
    if "I0_0plus" in eig and "I1_inf" in eig:
        R0 = eig["I1_inf"].extra.get("R0")
        matches.append({"case": "E2", "count": 1, "levels": [], "conditions": ["I0_0plus", "I1_inf"],
                        "shells": [{"text": f"K[R] minus closure of K[rho] for small rho and R > R0 = {R0}"}]})

    nonex = [r for r in records if r.id == "nonexistence" and r.verdict]
    best = max(matches, key=lambda m: (m["count"], -list(CASES).index(m["case"]) if m["case"] in CASES else -99),
               default=None)
    if best is not None and nonex:
        diagnostics.append("sampled non-existence conflicts with an existence case; check densities and caps")
    if best is not None:
        verdict, count = _WORDS[best["count"]], best["count"]
    elif nonex:
        verdict, count = "no nontrivial solution", 0
        diagnostics.append(f"non-existence holds on the sampled box |u|,|v| <= {nonex[0].extra['cap']}")
    else:
        verdict, count = "inconclusive", 0
    return {
        "verdict": verdict,
        "count": count,
        "case": None if best is None else best["case"],
        "levels": [] if best is None else best["levels"],
        "shells": [] if best is None else best["shells"],
        "matches": matches,
        "diagnostics": diagnostics,
    }


# --- report --------------------------------------------------------------------------------------


@dataclass
class CertificateReport:
    problem: dict
    constants: dict
    records: list
    conclusion: dict
    settings: dict
    ladder: dict = field(default_factory=dict)
    spectral: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable({
            "kind": "certificate",
            "problem": self.problem,
            "constants": self.constants,
            "ladder": self.ladder,
            "spectral": self.spectral,
            "records": [r.to_dict() for r in self.records],
            "conclusion": self.conclusion,
            "settings": self.settings,
            "notes": self.notes,
        })

    @classmethod
    def from_dict(cls, d: dict) -> "CertificateReport":
        return cls(d["problem"], d["constants"], [ConditionRecord.from_dict(r) for r in d["records"]],
                   d["conclusion"], d["settings"], d.get("ladder", {}), d.get("spectral", {}), d.get("notes", []))

    def record(self, cid, level=None) -> ConditionRecord:
        for r in self.records:
            if r.id == cid and r.level == level:
                return r
        raise KeyError((cid, level))


def describe_problem(p: ProblemSpec) -> dict:
    return {
        "name": p.name,
        "kernels": [k.label for k in p.kernels],
        "weights": [g.source for g in p.weights],
        "nonlinearities": [f.source for f in p.nonlinearities],
        "intervals": [list(iv) for iv in p.intervals],
        "c": list(p.c),
    }


def certify(p: ProblemSpec, ladder: RadiiLadder, density=defaults.BOX_DENSITY, refined=False,
            constants: Optional[ProblemConstants] = None, nonexistence_cap=None,
            eigen: Optional[dict] = None, spectra=None, tol=defaults.STRICTNESS_TOL) -> CertificateReport:
    """Check every ladder-level condition and conclude.

    ``eigen`` maps eigenvalue-condition kinds to their radius; it needs
    ``spectra`` (one :class:`OperatorSpectra` per component).
    """
    k = constants or problem_constants(p)
    m = k.m_refined if refined else k.m
    records = []
    for name, (x1, x2) in zip(ladder.names, ladder.levels):
        records.append(check_I1(p, x1, x2, *m, density, tol, name, refined))
        records.append(check_I0(p, x1, x2, *k.M, density, tol, name))
        records.append(check_I0_star(p, x1, x2, *k.M, density, tol, name))
        if p.same_interval():
            records.append(check_I0_underline(p, x1, x2, *k.M, False, density, tol, name))
            records.append(check_I0_underline(p, x1, x2, *k.M, True, density, tol, name))
    if nonexistence_cap is not None:
        records.append(check_nonexistence(p, *k.m, *k.M, nonexistence_cap, density, tol))
    notes = [f"sampled certificate, density {density} points per axis with one refinement pass"]
    for which, radius in (eigen or {}).items():
        if spectra is None:
            raise ValidationError("eigenvalue conditions need spectral data")
        records.append(check_eigen_conditions(p, spectra, which, radius, density=density, tol=tol))
    spectral = {} if spectra is None else {f"k{i}": s.to_dict() for i, s in enumerate(spectra, start=1)}
    settings = defaults.as_dict() | {"density": density, "refined_m": refined, "strictness_tol": tol}
    return CertificateReport(describe_problem(p), k.to_dict(), records, conclude(p, ladder, records),
                             settings, ladder.to_dict(), spectral, notes)
