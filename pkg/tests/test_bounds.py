import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import EXAMPLE_BIG_M, EXAMPLE_M
from hammercert.bounds import (closed_form_m, compute_M, compute_m, compute_m_refined, cross_check_m,
                               inverse_M_closed_form, optimal_interval, optimal_interval_numeric, theta1,
                               theta2, vartheta1, vartheta2)
from hammercert.errors import BoundError
from hammercert.kernels import DerivativeKernel, ThreePointKernel, WeightFunction


def _quad_abs(k, g, t):
    pts = sorted({t, k.point} | set(k.zero_crossings(t)))
    return quad(lambda s: abs(k.eval(t, s)) * g(s), 0, 1, points=pts, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def test_example_m_matches_independent_quadrature(k1, k2, g_example):
    for k, m in ((k1, EXAMPLE_M[0]), (k2, EXAMPLE_M[1])):
        res = compute_m(k, g_example)
        assert res.value == pytest.approx(m, rel=1e-10)
        assert res.witness_t == 0.0
        assert 1 / _quad_abs(k, g_example, 0.0) == pytest.approx(m, rel=1e-10)
        # t = 0 really is the maximizer
        assert max(_quad_abs(k, g_example, t) for t in np.linspace(0, 1, 41)) <= 1 / m + 1e-12


def test_example_M(k1, k2, g_example):
    for k in (k1, k2):
        res = compute_M(k, g_example)
        assert res.value == pytest.approx(EXAMPLE_BIG_M[0], rel=1e-10)
        assert res.witness_t == pytest.approx(0.25, abs=1e-8)


def test_refined_m_never_below_m(k1, k2, g_example, unit):
    for k in (k1, k2):
        for g in (g_example, unit):
            assert compute_m_refined(k, g).value >= compute_m(k, g).value * (1 - 1e-12)


def test_unit_weight_closed_forms_by_hand():
    k = ThreePointKernel(-1.0, 0.5)
    # vartheta1(0) = (1/8 + 1/4 + 1/2)/2 - 1/8
    assert vartheta1(0.0, -1.0, 0.5) == pytest.approx(0.3125)
    assert closed_form_m(k).value == pytest.approx(3.2)
    assert closed_form_m(DerivativeKernel(0.25, 0.25)).value == pytest.approx(1 / (0.5 - 1 / 16))
    assert inverse_M_closed_form(k, 0.25) == pytest.approx(0.125)
    assert inverse_M_closed_form(DerivativeKernel(0.25, 0.25), 0.25) == pytest.approx(0.125)


@pytest.mark.parametrize("al, eta", [(-1.0, 0.5), (-3.0, 0.9), (-0.2, 0.3), (-5.0, 0.3)])
def test_vartheta_against_quadrature(al, eta, unit):
    k = ThreePointKernel(al, eta)
    tb = (1 - al * eta) / (1 - al)
    assert vartheta1(tb, al, eta) == pytest.approx(vartheta2(tb, al, eta), abs=1e-12)
    for t in np.linspace(0, 1, 9):
        cf = vartheta1(t, al, eta) if t <= tb else vartheta2(t, al, eta)
        assert cf == pytest.approx(_quad_abs(k, unit, t), abs=1e-11)


@pytest.mark.parametrize("al, xi", [(0.25, 0.25), (0.1, 0.6), (0.5, 0.4)])
def test_theta_against_quadrature(al, xi, unit):
    k = DerivativeKernel(al, xi)
    tb = 1 - al
    assert theta1(tb, al, xi) == pytest.approx(theta2(tb, al, xi), abs=1e-12)
    for t in np.linspace(0, 1, 9):
        cf = theta1(t, al, xi) if t <= tb else theta2(t, al, xi)
        assert cf == pytest.approx(_quad_abs(k, unit, t), abs=1e-11)


def test_branch_with_witness_at_one():
    k = ThreePointKernel(-5.0, 0.3)
    assert -2 * k.alpha * k.eta**2 + k.alpha + 1 < 0
    cf = closed_form_m(k)
    assert cf.witness_t == 1.0
    assert compute_m(k, WeightFunction("1")).value == pytest.approx(cf.value, rel=1e-9)


def test_cross_check(k1, unit, g_example):
    out = cross_check_m(k1, unit)
    assert out["numeric"].value == pytest.approx(out["closed_form"].value, rel=1e-8)
    assert "closed_form" not in cross_check_m(k1, g_example)


def test_optimal_intervals(unit, g_example):
    k = ThreePointKernel(-1.0, 0.5)
    cf = optimal_interval(k)
    assert (cf.a, cf.b) == (0.0, 0.375)
    assert cf.M == pytest.approx(1 / (0.375 * 0.375))
    num = optimal_interval_numeric(k, unit)
    assert num.b == pytest.approx(cf.b, abs=1e-6)
    weighted = optimal_interval_numeric(k, g_example)
    assert weighted.M <= compute_M(k.with_interval((0.0, 0.25)), g_example).value


def test_zero_weight_is_a_zero_denominator(k1):
    zero = WeightFunction("0")
    with pytest.raises(BoundError, match="zero denominator"):
        compute_m(k1, zero)
    with pytest.raises(BoundError, match="zero denominator"):
        compute_m_refined(k1, zero)
    with pytest.raises(BoundError, match="not positive"):
        compute_M(k1, zero)


def test_invalid_interval(k1, unit):
    with pytest.raises(BoundError):
        compute_M(k1, unit, 0.3, 0.2)


def test_weight_vanishing_on_interval(k1):
    g = WeightFunction("max(t - 0.5, 0)")
    assert math.isfinite(compute_m(k1, g).value)
    with pytest.raises(BoundError):
        compute_M(k1, g)
