"""Problem files: JSON documents validated against a schema, then against the kernel constraints.

Numeric fields accept either JSON numbers or constant expressions such as
``"1/6"`` or ``"exp(2)"``; weights and nonlinearities are expression strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import jsonschema

from . import defaults
from .bounds import optimal_interval, optimal_interval_numeric
from .certificates import ProblemSpec, RadiiLadder
from .errors import HammerError, ProblemFileError
from .expr import Expression, constant_value
from .kernels import DerivativeKernel, ThreePointKernel, WeightFunction
from .radial import AnnulusSpec, ReducedData, build_weights

SCHEMA_VERSION = 1
INTERVAL_MODES = ("optimal", "optimal_numeric")


def _schema(name: str) -> dict:
    return json.loads(resources.files("hammercert").joinpath("data").joinpath(name).read_text(encoding="utf-8"))


def problem_schema() -> dict:
    return _schema("problem.schema.json")


def report_schema() -> dict:
    return _schema("report.schema.json")


def example_path():
    """Path of the shipped Example problem file."""
    return resources.files("hammercert").joinpath("data").joinpath("example.json")


@dataclass
class LoadedProblem:
    problem: ProblemSpec
    ladder: Optional[RadiiLadder]
    solver: dict = field(default_factory=dict)
    spectral: dict = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)
    annulus: Optional[AnnulusSpec] = None
    reduced: Optional[ReducedData] = None
    notes: list = field(default_factory=list)


def _schema_errors(doc, schema) -> list:
    v = jsonschema.Draft202012Validator(schema)
    out = []
    for err in sorted(v.iter_errors(doc), key=lambda e: [str(p) for p in e.absolute_path]):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        out.append(f"{where}: {err.message}")
    return out


def validate_report(report: dict) -> None:
    errors = _schema_errors(report, report_schema())
    if errors:
        raise ProblemFileError(errors)


class _Collector:
    """Runs constructors and gathers their validation messages under a path."""

    def __init__(self):
        self.problems = []

    def run(self, where, fn, *args):
        try:
            return fn(*args)
        except HammerError as exc:
            self.problems.append(f"{where}: {exc}")
        except (TypeError, ValueError) as exc:
            self.problems.append(f"{where}: {exc}")
        return None

    def num(self, where, value):
        return self.run(where, constant_value, value)


def _annulus(doc, col, phi_mode):
    a = doc["annulus"]
    nums = {k: col.num(f"annulus/{k}", a[k]) for k in ("R1", "R0", "alpha1", "alpha2", "R_eta", "R_xi") if k in a}
    if any(v is None for v in nums.values()):
        return None
    mode = phi_mode or a.get("phi_mode", "derived")
    return col.run("annulus", lambda: AnnulusSpec(
        a["n"], nums["R1"], nums["R0"], tuple(a.get("h", ("1", "1"))),
        nums.get("alpha1", -1.0), nums.get("alpha2", 0.25), nums.get("R_eta"), nums.get("R_xi"), mode))


def _kernel(i, spec, reduced, col):
    where = f"kernels/{i}"
    params = {}
    for key in ("alpha", "eta", "xi"):
        if key in spec:
            params[key] = col.num(f"{where}/{key}", spec[key])
    if reduced is not None:
        # radial weights supply the boundary data the kernel entry leaves out
        if spec["variant"] == "three_point":
            params.setdefault("alpha", reduced.alpha1)
            params.setdefault("eta", reduced.eta)
        else:
            params.setdefault("alpha", reduced.alpha2)
            params.setdefault("xi", reduced.xi)
    point = "eta" if spec["variant"] == "three_point" else "xi"
    for key in ("alpha", point):
        if params.get(key) is None:
            if key in spec or reduced is not None:
                continue  # already reported
            col.problems.append(f"{where}: missing {key!r}")
    if any(params.get(k) is None for k in ("alpha", point)):
        return None
    cls = ThreePointKernel if spec["variant"] == "three_point" else DerivativeKernel
    # the interval is resolved later, once weights are known
    return col.run(where, cls, params["alpha"], params[point])


def _interval(i, kernel, g, entry, col):
    where = f"intervals/{i}"
    if entry == "optimal":
        res = col.run(where, optimal_interval, kernel)
        return None if res is None else (res.a, res.b)
    if entry == "optimal_numeric":
        res = col.run(where, optimal_interval_numeric, kernel, g)
        return None if res is None else (res.a, res.b)
    lo, hi = col.num(f"{where}/0", entry[0]), col.num(f"{where}/1", entry[1])
    return None if lo is None or hi is None else (lo, hi)


def _ladder(spec, col):
    if isinstance(spec, dict):
        names, raw = tuple(spec), list(spec.values())
    else:
        names, raw = (), spec
    levels = []
    for j, lvl in enumerate(raw):
        pair = tuple(col.num(f"ladder/{names[j] if names else j}/{k}", x) for k, x in enumerate(lvl))
        levels.append(pair)
    if any(x is None for lvl in levels for x in lvl):
        return None
    return col.run("ladder", RadiiLadder, tuple(levels), names)


def parse_problem(doc: dict, phi_mode: Optional[str] = None, numeric_intervals: bool = True) -> LoadedProblem:
    """Validate a decoded problem document and build the objects it describes.

    Every schema violation is reported in one :class:`ProblemFileError`;
    constraint violations found while building kernels, weights and
    nonlinearities are likewise collected before raising.
    """
    errors = _schema_errors(doc, problem_schema())
    if errors:
        raise ProblemFileError(errors)
    col = _Collector()
    notes = []

    annulus = reduced = None
    if "annulus" in doc:
        annulus = _annulus(doc, col, phi_mode)
        if annulus is not None:
            reduced = col.run("annulus", build_weights, annulus)
            if reduced is not None:
                notes += list(reduced.notes)
    radial = doc["weights"] == "radial"
    if radial and "annulus" not in doc:
        col.problems.append("weights: 'radial' needs an annulus section")

    if radial:
        weights = list(reduced.g) if reduced is not None else [None, None]
    else:
        weights = [col.run(f"weights/{i}", lambda src=src, i=i: WeightFunction(Expression(src, ("t",)), f"g{i + 1}"))
                   for i, src in enumerate(doc["weights"])]

    kernels = [_kernel(i, spec, reduced if radial else None, col) for i, spec in enumerate(doc["kernels"])]
    kinds = [spec["variant"] for spec in doc["kernels"]]
    if kinds != ["three_point", "derivative"]:
        col.problems.append(f"kernels: expected variants ['three_point', 'derivative'], got {kinds}")

    nonlin = [col.run(f"nonlinearities/{i}", Expression, src, ("t", "u", "v"))
              for i, src in enumerate(doc["nonlinearities"])]

    iv_spec = doc.get("intervals", "optimal_numeric" if numeric_intervals else "optimal")
    entries = [iv_spec, iv_spec] if isinstance(iv_spec, str) else iv_spec
    for i, (k, g) in enumerate(zip(kernels, weights)):
        if k is None or g is None:
            continue
        iv = _interval(i, k, g, entries[i], col)
        if iv is not None:
            kernels[i] = col.run(f"intervals/{i}", k.with_interval, iv)

    ladder = _ladder(doc["ladder"], col) if "ladder" in doc else None

    if col.problems:
        raise ProblemFileError(col.problems)
    problem = ProblemSpec(tuple(kernels), tuple(weights), tuple(nonlin), doc.get("name", "problem"))
    return LoadedProblem(problem, ladder, dict(doc.get("solver", {})), dict(doc.get("spectral", {})),
                         dict(doc.get("certificate", {})), annulus, reduced, notes)


def read_document(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ProblemFileError(f"{path}: {exc.strerror}") from exc


def load_problem(path, phi_mode: Optional[str] = None) -> LoadedProblem:
    return parse_problem(read_document(path), phi_mode)


def load_example(phi_mode: Optional[str] = None) -> LoadedProblem:
    with resources.as_file(example_path()) as p:
        return load_problem(p, phi_mode)


def reduced_document(doc: dict, loaded: LoadedProblem) -> dict:
    """The problem file with radial weights, intervals and boundary data written out explicitly."""
    p = loaded.problem
    out = {k: v for k, v in doc.items() if k != "annulus"}
    out["weights"] = [g.source for g in p.weights]
    out["kernels"] = [
        {"variant": "three_point", "alpha": p.kernels[0].alpha, "eta": p.kernels[0].eta},
        {"variant": "derivative", "alpha": p.kernels[1].alpha, "xi": p.kernels[1].xi},
    ]
    out["intervals"] = [list(iv) for iv in p.intervals]
    out["spec"] = SCHEMA_VERSION
    if loaded.notes:
        out["notes"] = list(loaded.notes)
    return out


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


SETTING_DEFAULTS = {
    "solver": {"panels": defaults.SOLVER_PANELS, "starts_per_shell": defaults.STARTS_PER_SHELL,
               "expected": None, "report_residual": defaults.REPORT_RESIDUAL},
    "spectral": {"N": defaults.SPECTRAL_N, "eigen": {}},
    "certificate": {"density": defaults.BOX_DENSITY, "refined_m": False, "nonexistence_cap": None},
}
