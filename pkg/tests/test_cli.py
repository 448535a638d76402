import csv
import json
import subprocess
import sys

import pytest

from hammercert import cli
from hammercert.config import example_path, validate_report
from hammercert.errors import SpectralError


@pytest.fixture
def example_doc():
    return json.loads(example_path().read_text(encoding="utf-8"))


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run_json(tmp_path, argv):
    out = tmp_path / "out.json"
    code = cli.main(argv + ["--json", str(out)])
    return code, json.loads(out.read_text()) if out.exists() else None


def test_constants(tmp_path, capsys):
    code, rep = run_json(tmp_path, ["constants"])
    assert code == 0
    validate_report(rep)
    assert rep["constants"]["c"] == [0.25, 0.5]
    assert "m = " in capsys.readouterr().out


def test_constants_to_stdout(capsys):
    assert cli.main(["constants", "--tol", "1e-10"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["settings"]["tol"] == 1e-10


def test_optimal_interval(tmp_path):
    code, rep = run_json(tmp_path, ["optimal-interval"])
    assert code == 0
    validate_report(rep)


def test_spectral_grid_study(tmp_path):
    code, rep = run_json(tmp_path, ["spectral", "--grid", "32"])
    assert code == 0
    validate_report(rep)


def test_certify_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["certify", "--density", "16", "--json", str(a)]) == 0
    assert cli.main(["certify", "--density", "16", "--json", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    validate_report(rep)
    assert rep["conclusion"]["count"] == 2


def test_solve_writes_csv(tmp_path, example_doc):
    example_doc["solver"]["starts_per_shell"] = 1
    path = write(tmp_path, "p.json", example_doc)
    code, rep = run_json(tmp_path, ["solve", path, "--csv", str(tmp_path / "sol.csv")])
    assert code == 0
    validate_report(rep)
    assert rep["count"] == len(rep["csv"]) >= 1
    with open(rep["csv"][0]) as fh:
        assert next(csv.reader(fh)) == ["t", "u", "v"]


def annulus_doc():
    return {
        "spec": 1,
        "kernels": [{"variant": "three_point"}, {"variant": "derivative"}],
        "weights": "radial",
        "nonlinearities": ["1", "1"],
        "intervals": "optimal_numeric",
        "ladder": {"rho": [0.01, 0.01], "r": [1, 1]},
        "solver": {"starts_per_shell": 1},
        "annulus": {"n": 3, "R1": 1, "R0": 2, "alpha1": -1, "alpha2": "1/4", "R_eta": 1.5, "R_xi": 1.2},
    }


def test_solve_on_annulus_writes_radial_profile(tmp_path):
    path = write(tmp_path, "ann.json", annulus_doc())
    code, rep = run_json(tmp_path, ["solve", path, "--csv", str(tmp_path / "s.csv")])
    assert code == 0
    assert rep["count"] == 1
    with open(rep["csv_radial"][0]) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "u", "v"]
    assert float(rows[1][0]) == 1.0 and float(rows[-1][0]) == 2.0


def test_reduce(tmp_path):
    path = write(tmp_path, "ann.json", annulus_doc())
    code, out = run_json(tmp_path, ["reduce", path])
    assert code == 0
    assert "annulus" not in out
    # 1/r = 1/2 + t/2, so r = 1.5 sits at t = 1/3
    assert out["kernels"][0]["eta"] == pytest.approx(1 / 3)
    assert out["notes"]


def test_reduce_needs_annulus(tmp_path, example_doc, capsys):
    assert cli.main(["reduce", write(tmp_path, "p.json", example_doc)]) == 1
    assert "annulus" in capsys.readouterr().err


def test_reproduce_example_without_solve(tmp_path, capsys):
    code, rep = run_json(tmp_path, ["reproduce-example", "--skip-solve", "--density", "16"])
    assert code == 0
    assert rep["passed"]
    validate_report(rep)
    assert any("0.653426" in note for note in rep["notes"])
    out = capsys.readouterr().out
    assert "FAIL" not in out and "m1" in out


@pytest.mark.parametrize("argv", [["bogus"], ["certify", "--density", "x"], []])
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 1


def test_validation_errors_exit_1(tmp_path, example_doc, capsys):
    example_doc["kernels"][0]["alpha"] = 1
    example_doc["extra"] = True
    assert cli.main(["constants", write(tmp_path, "p.json", example_doc)]) == 1
    assert "extra" in capsys.readouterr().err

    del example_doc["extra"]
    assert cli.main(["constants", write(tmp_path, "p.json", example_doc)]) == 1
    assert "kernels/0" in capsys.readouterr().err

    assert cli.main(["constants", str(tmp_path / "missing.json")]) == 1


def test_numeric_failure_exit_2(monkeypatch, capsys):
    def boom(*a, **k):
        raise SpectralError("power iteration did not converge")

    monkeypatch.setattr(cli, "problem_constants", boom)
    assert cli.main(["constants"]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_internal_error_exit_3(monkeypatch, capsys):
    monkeypatch.setattr(cli, "problem_constants", lambda *a, **k: 1 / 0)
    assert cli.main(["constants"]) == 3
    assert "ZeroDivisionError" in capsys.readouterr().err


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "hammercert.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for name in cli.COMMANDS:
        assert name in res.stdout
