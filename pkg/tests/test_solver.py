import csv
import math

import numpy as np
import pytest

from hammercert.certificates import ProblemSpec, RadiiLadder
from hammercert.errors import ConvergenceError, SingularJacobianError, ValidationError
from hammercert.expr import ExpressionError
from hammercert.kernels import DerivativeKernel, ThreePointKernel, unit_weight
from hammercert.solver import (
    HammersteinSystem,
    MultistartResult,
    apply_T,
    graded_edges,
    interpolant,
    localize,
    multistart,
    seed_magnitudes,
    solve_newton,
    solve_picard,
    write_profile_csv,
    write_solution_csv,
)

KERNELS = (ThreePointKernel(-1.0, 0.5, (0.0, 0.25)), DerivativeKernel(0.25, 0.25, (0.0, 0.25)))


def system(f1, f2, **kw):
    one = unit_weight()
    return HammersteinSystem(ProblemSpec(KERNELS, (one, one), (f1, f2)), **kw)


@pytest.fixture(scope="module")
def constant_rhs():
    return system("1", "1")


# u = int k1(t, s) ds and v = int k2(t, s) ds worked out by hand
def u_exact(t):
    return 5 / 16 - t**2 / 2


def v_exact(t):
    return 7 / 16 - t**2 / 2


def test_newton_one_step_for_constant_rhs(constant_rhs):
    res = solve_newton(constant_rhs, (0.0, 0.0))
    assert res.converged and res.iterations == 1
    t = constant_rhs.nodes
    assert np.max(np.abs(res.pair.u - u_exact(t))) <= 1e-13
    assert np.max(np.abs(res.pair.v - v_exact(t))) <= 1e-13


def test_picard_and_newton_agree():
    s = system("1 + u/2", "1 + abs(v)/4")
    pic = solve_picard(s, (0.0, 0.0))
    new = solve_newton(s, (0.0, 0.0))
    assert pic.converged and new.converged
    assert pic.pair.distance(new.pair) <= 1e-9
    assert pic.trace[-1] <= 1e-10


def test_apply_matches_fixed_point(constant_rhs):
    x = solve_newton(constant_rhs, (0.0, 0.0)).pair
    assert apply_T(constant_rhs, x).distance(x) <= 1e-13


def test_value_and_derivative_off_grid(constant_rhs):
    x = solve_newton(constant_rhs, (0.0, 0.0)).pair
    t = np.array([0.1, 0.33, 0.9])
    assert constant_rhs.value_at(1, x.u, x.v, t) == pytest.approx(u_exact(t), abs=1e-13)
    assert constant_rhs.derivative_at(2, x.u, x.v, t) == pytest.approx(-t, abs=1e-12)


def test_pair_norms_and_cone(constant_rhs):
    x = solve_newton(constant_rhs, (0.0, 0.0)).pair
    assert x.norms == pytest.approx((5 / 16, 7 / 16), abs=1e-13)
    # minima over [0, 1/4]
    assert x.mins == pytest.approx((u_exact(0.25), v_exact(0.25)), abs=1e-13)
    assert x.cone == (True, True)
    assert x.sign_change == (True, True)


def test_sign_changes(constant_rhs):
    x = solve_newton(constant_rhs, (0.0, 0.0)).pair
    roots = constant_rhs.sign_changes(x)
    assert roots == pytest.approx([math.sqrt(5 / 8), math.sqrt(7 / 8)], abs=1e-12)


def test_transfer_to_adapted_grid(constant_rhs):
    x = solve_newton(constant_rhs, (0.0, 0.0)).pair
    other = constant_rhs.adapted(x)
    assert other.crossings == pytest.approx([math.sqrt(5 / 8), math.sqrt(7 / 8)])
    assert other.size > constant_rhs.size
    y = constant_rhs.transfer(x, other)
    assert y.residual <= 1e-13
    assert y.distance(x) <= 1e-13


def test_refined_keeps_crossings():
    s = system("1", "1", crossings=(0.4,))
    r = s.refined()
    assert r.n_panels == 2 * s.n_panels and r.crossings == (0.4,)


def test_graded_edges():
    edges = graded_edges([0.5], 0.1, ratio=0.25, floor=1e-3)
    expect = [0.5, 0.4, 0.6, 0.475, 0.525, 0.49375, 0.50625, 0.4984375, 0.5015625]
    assert edges == pytest.approx(expect)
    assert graded_edges([0.01], 0.1, floor=0.01) == pytest.approx([0.01, 0.11, 0.035])


def test_singular_jacobian(constant_rhs):
    mu = float(max(np.linalg.eigvals(constant_rhs.B[0]).real))
    s = system(f"{1 / mu!r}*u", "1")
    with pytest.raises(SingularJacobianError, match="singular Jacobian"):
        solve_newton(s, (0.0, 0.0))


def test_newton_without_solution_stalls():
    with pytest.raises(ConvergenceError) as info:
        solve_newton(system("20*exp(u)", "1"), (0.0, 0.0))
    assert info.value.last is not None


def test_picard_overflow_reported_as_divergence():
    res = solve_picard(system("20*exp(u)", "1"), (0.0, 0.0), max_iter=50)
    assert not res.converged
    assert res.message.startswith("diverged")


def test_picard_iteration_cap():
    res = solve_picard(system("1 + u/2", "1"), (0.0, 0.0), max_iter=3)
    assert not res.converged and "no convergence in 3" in res.message


def test_picard_damping_validation(constant_rhs):
    with pytest.raises(ValidationError, match="damping"):
        solve_picard(constant_rhs, (0, 0), damping=0.0)


def test_f_value_error_names_node():
    s = system("sqrt(u)", "1")
    with pytest.raises(ExpressionError, match=r"f_1: .* at node t = [0-9.e-]+ \(u = -1.0"):
        s.apply(-np.ones(s.size), np.ones(s.size))


def test_seed_magnitudes():
    seeds = seed_magnitudes(RadiiLadder(((1, 1), (4, 4))), (0.5, 0.5), per_shell=1)
    assert seeds == pytest.approx([(0.5, 0.5), (2.0, 2.0), (math.sqrt(32), math.sqrt(32))])


def test_multistart_unique_solution(constant_rhs):
    ms = multistart(constant_rhs, RadiiLadder(((0.1, 0.1), (1.0, 1.0))), starts_per_shell=1, expected=1)
    assert len(ms.solutions) == 1
    assert ms.status == "found"
    x = ms.solutions[0]
    assert x.norms == pytest.approx((5 / 16, 7 / 16), abs=1e-12)
    assert not ms.trivial_found


def test_multistart_status():
    assert MultistartResult([], True, [], expected=2).status == "not found numerically"
    assert MultistartResult([], True, []).status == "found"


def test_localize(constant_rhs):
    x = constant_rhs.constant(2.0, 2.0)
    ladder = RadiiLadder(((1, 1), (3, 3)))
    shell = {"outer": "K", "outer_level": "r", "inner": "V", "inner_level": "rho", "text": "K[r] minus V[rho]"}
    loc = localize(x, ladder, [shell, {"text": "eigen"}])
    assert loc["levels"]["r"]["in_K"] and not loc["levels"]["rho"]["in_closed_V"]
    assert loc["shells"] == ["K[r] minus V[rho]"]
    edge = localize(constant_rhs.constant(1.0, 0.5), ladder)
    assert edge["levels"]["rho"]["on_boundary_V"]


def test_interpolant_reproduces_nodes(constant_rhs):
    x = solve_newton(constant_rhs, (0.0, 0.0)).pair
    u = interpolant(x, 1)
    assert u(x.nodes) == pytest.approx(x.u, abs=1e-13)
    assert u(0.5)[0] == pytest.approx(u_exact(0.5), abs=1e-12)


def test_csv_writers(tmp_path, constant_rhs):
    x = solve_newton(constant_rhs, (0.0, 0.0)).pair
    write_solution_csv(tmp_path / "sol.csv", x)
    with open(tmp_path / "sol.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "u", "v"] and len(rows) == x.nodes.size + 1
    assert float(rows[1][1]) == x.u[0]

    write_profile_csv(tmp_path / "prof.csv", [(1.0, 2.0, 3.0)])
    with open(tmp_path / "prof.csv") as fh:
        assert fh.read().splitlines() == ["r,u,v", "1.0,2.0,3.0"]


def test_pair_to_dict(constant_rhs):
    d = constant_rhs.constant(1.0, 2.0).to_dict()
    assert d["norms"] == pytest.approx([1.0, 2.0]) and d["u0"] == 1.0
