import copy
import json
import math

import jsonschema
import pytest

from hammercert.config import (
    dumps,
    example_path,
    load_problem,
    parse_problem,
    problem_schema,
    read_document,
    reduced_document,
)
from hammercert.certificates import problem_constants
from hammercert.errors import BoundError, ProblemFileError


@pytest.fixture
def doc():
    return json.loads(example_path().read_text(encoding="utf-8"))


@pytest.fixture
def annulus_doc():
    return {
        "spec": 1,
        "kernels": [{"variant": "three_point"}, {"variant": "derivative"}],
        "weights": "radial",
        "nonlinearities": ["1", "1"],
        "annulus": {"n": 2, "R1": 1, "R0": "e", "alpha1": -1, "alpha2": "1/4",
                    "R_eta": "exp(1/2)", "R_xi": "exp(3/4)", "phi_mode": "paper_printed"},
    }


def test_example_loads(example):
    p = example.problem
    assert p.c == (0.25, 0.5)
    assert p.intervals == ((0.0, 0.25), (0.0, 0.25))
    assert p.kernels[0].eta == 0.5 and p.kernels[1].alpha == 0.25
    assert p.weights[0](0.0) == pytest.approx(math.e**2)
    assert example.ladder.names == ("rho", "r", "s")
    assert example.ladder["rho"] == pytest.approx((1 / 6, 1 / 3))
    assert example.solver["expected"] == 2


def test_schema_is_valid_json_schema():
    jsonschema.Draft202012Validator.check_schema(problem_schema())


def test_unknown_key_rejected(doc):
    doc["extra"] = 1
    with pytest.raises(ProblemFileError, match="extra"):
        parse_problem(doc)


def test_schema_errors_enumerated(doc):
    doc["spec"] = 2
    doc["kernels"][0]["variant"] = "four_point"
    del doc["nonlinearities"]
    with pytest.raises(ProblemFileError) as info:
        parse_problem(doc)
    text = str(info.value)
    for needle in ("spec", "four_point", "nonlinearities"):
        assert needle in text


def test_constraint_errors_enumerated(doc):
    doc["kernels"][0]["alpha"] = 1
    doc["kernels"][1]["xi"] = "1/0"
    doc["weights"][0] = "1 +"
    with pytest.raises(ProblemFileError) as info:
        parse_problem(doc)
    problems = info.value.problems
    assert any(p.startswith("kernels/0") for p in problems)
    assert any(p.startswith("kernels/1/xi") for p in problems)
    assert any(p.startswith("weights/0") for p in problems)


def test_zero_weight_reported(doc):
    doc["weights"] = ["0", "0"]
    # explicit intervals defer the failure to the constants
    loaded = parse_problem(doc)
    with pytest.raises(BoundError, match="zero denominator"):
        problem_constants(loaded.problem)
    del doc["intervals"]
    with pytest.raises(ProblemFileError, match="intervals/0: zero denominator"):
        parse_problem(doc)


def test_wrong_variant_order(doc):
    doc["kernels"] = doc["kernels"][::-1]
    with pytest.raises(ProblemFileError, match="expected variants"):
        parse_problem(doc)


def test_optimal_intervals_agree_for_unit_weight(doc):
    doc["weights"] = ["1", "1"]
    doc["intervals"] = "optimal"
    closed = parse_problem(doc).problem.intervals
    doc["intervals"] = "optimal_numeric"
    numeric = parse_problem(doc).problem.intervals
    for (a, b), (x, y) in zip(closed, numeric):
        assert a == pytest.approx(x, abs=1e-12)
        assert b == pytest.approx(y, abs=1e-6)


def test_mixed_interval_entries(doc):
    doc["weights"] = ["1", "1"]
    doc["intervals"] = [["0", "1/8"], "optimal"]
    p = parse_problem(doc).problem
    assert p.intervals[0] == (0.0, 0.125)


def test_ladder_as_list(doc):
    doc["ladder"] = [[1, 2], ["3", "4"]]
    lad = parse_problem(doc).ladder
    assert lad.names == ("rho", "r") and lad["r"] == (3.0, 4.0)


def test_radial_problem(annulus_doc):
    loaded = parse_problem(annulus_doc)
    k1, k2 = loaded.problem.kernels
    assert k1.eta == pytest.approx(0.5, abs=1e-12)
    assert k2.xi == pytest.approx(0.25, abs=1e-12)
    assert k1.alpha == -1.0 and k2.alpha == 0.25
    assert loaded.problem.weights[0](0.3) == pytest.approx(math.e**2 * 0.49)
    assert any("paper_printed" in n for n in loaded.notes)


def test_radial_phi_mode_override(annulus_doc):
    loaded = parse_problem(annulus_doc, phi_mode="derived")
    assert loaded.problem.weights[0](0.3) == pytest.approx(math.exp(2 * 0.7))


def test_radial_needs_annulus(annulus_doc):
    del annulus_doc["annulus"]
    with pytest.raises(ProblemFileError, match="needs an annulus"):
        parse_problem(annulus_doc)


def test_radial_explicit_kernel_value_wins(annulus_doc):
    annulus_doc["kernels"][0]["eta"] = "0.4"
    assert parse_problem(annulus_doc).problem.kernels[0].eta == 0.4


def test_reduced_document_round_trip(annulus_doc):
    loaded = parse_problem(annulus_doc)
    red = reduced_document(annulus_doc, loaded)
    assert "annulus" not in red
    again = parse_problem(json.loads(dumps(red)))
    for iv, jv in zip(again.problem.intervals, loaded.problem.intervals):
        assert iv == pytest.approx(jv)
    assert again.problem.kernels[0].eta == loaded.problem.kernels[0].eta
    assert again.problem.weights[1](0.7) == pytest.approx(loaded.problem.weights[1](0.7))


def test_read_document_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  \"spec\": 1,\n}")
    with pytest.raises(ProblemFileError, match="line 3"):
        read_document(bad)
    with pytest.raises(ProblemFileError, match="No such file"):
        read_document(tmp_path / "missing.json")


def test_load_problem_from_disk(tmp_path, doc):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    assert load_problem(path).problem.c == (0.25, 0.5)


def test_dumps_is_deterministic(doc):
    a = dumps(doc)
    b = dumps(copy.deepcopy(dict(reversed(list(doc.items())))))
    assert a == b and a.endswith("\n")
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})
