import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hammercert.errors import QuadratureError
from hammercert.quadrature import PanelRule, extremize, gauss_legendre, integrate, integrate_with_error, panel_edges


def test_gauss_legendre_exact_for_degree_2n_minus_1():
    x, w = gauss_legendre(8)
    for k in range(16):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert np.dot(w, x**k) == pytest.approx(exact, abs=1e-14)


def test_panel_edges_keeps_inner_breakpoints_only():
    np.testing.assert_array_equal(panel_edges(0.0, 1.0, [0.5, 0.5, -1.0, 1.0, 0.25]), [0, 0.25, 0.5, 1.0])


def test_panel_rule_subdivision():
    rule = PanelRule(np.array([0.0, 0.5, 1.0]), 4, 2)
    np.testing.assert_allclose(rule.panels, np.linspace(0, 1, 9))
    assert rule.apply(lambda s: s**3) == pytest.approx(0.25, abs=1e-15)


def test_kinked_integrand_exact_with_breakpoint():
    f = lambda s: np.abs(s - 1 / 3)
    exact = (1 / 3) ** 2 / 2 + (2 / 3) ** 2 / 2
    assert integrate(f, 0, 1, [1 / 3]) == pytest.approx(exact, abs=1e-15)
    # without the breakpoint adaptive halving still gets there, just slower
    assert integrate(f, 0, 1, tol=1e-9) == pytest.approx(exact, abs=1e-8)


def test_integrate_smooth_and_degenerate():
    assert integrate(np.exp, 0, 1) == pytest.approx(math.e - 1, rel=1e-14)
    assert integrate(np.exp, 0.3, 0.3) == 0.0
    with pytest.raises(ValueError):
        integrate(np.exp, 1, 0)


def test_integrate_reports_failure_with_estimate():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda s: 1 / np.sqrt(s), 0, 1, tol=1e-14, max_depth=3)
    assert info.value.estimate == pytest.approx(2.0, rel=0.1)


def test_integrate_with_error_reports_depth():
    val, err, depth = integrate_with_error(lambda s: s**20, 0, 1)
    assert val == pytest.approx(1 / 21, rel=1e-13)
    assert err <= 1e-10
    assert depth >= 1


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(-3, 3))
def test_piecewise_linear_integrals(p, slope):
    f = lambda s: np.where(s <= p, slope * (p - s), 0.0)
    assert integrate(f, 0, 1, [p]) == pytest.approx(slope * p * p / 2, abs=1e-13)


def test_extremize_interior_and_endpoints():
    t, v = extremize(lambda t: -(t - 0.3) ** 2, "sup")
    assert t == pytest.approx(0.3, abs=1e-8)
    assert v == pytest.approx(0.0, abs=1e-15)
    t, v = extremize(lambda t: t, "inf", 0.2, 0.9)
    assert (t, v) == (0.2, 0.2)
    t, v = extremize(lambda t: t, "sup", 0.2, 0.9)
    assert t == pytest.approx(0.9)


def test_extremize_flat_keeps_leftmost():
    t, v = extremize(lambda t: 1.0 + 1e-17 * math.sin(40 * t), "sup")
    assert t == 0.0


def test_extremize_kink():
    t, v = extremize(lambda t: -abs(t - 1 / 7), "sup")
    assert t == pytest.approx(1 / 7, abs=1e-8)


def test_extremize_validates():
    with pytest.raises(ValueError):
        extremize(abs, "max")
    with pytest.raises(ValueError):
        extremize(abs, "sup", grid_n=1)
