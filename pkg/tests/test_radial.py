import math

import numpy as np
import pytest

from hammercert.errors import ValidationError
from hammercert.expr import Expression
from hammercert.radial import AnnulusSpec, build_weights, pull_back, substitution, weight_expression


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_endpoints_and_monotone(n):
    s = substitution(n, 0.5, 3.0)
    assert s.r(0.0) == pytest.approx(3.0) and s.r(1.0) == pytest.approx(0.5)
    t = np.linspace(0, 1, 200)
    assert np.all(np.diff(s.r(t)) < 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_laplacian_becomes_weighted_second_derivative(n):
    """W(r) = w(t(r)) satisfies W'' + (n-1)/r W' = w''(t) / phi(t)."""
    s = substitution(n, 1.0, 2.0)
    for r in (1.2, 1.5, 1.8):
        h = 1e-3
        W = lambda x: s.t_of(x) ** 2
        d1 = (W(r + h) - W(r - h)) / (2 * h)
        d2 = (W(r + h) - 2 * W(r) + W(r - h)) / h**2
        lap = d2 + (n - 1) / r * d1
        t = s.t_of(r)
        assert lap == pytest.approx(2.0 / s.phi(t), rel=1e-5)


def test_n3_closed_form():
    s = substitution(3, 1.0, 2.0)
    t = np.linspace(0, 1, 11)
    assert np.allclose(s.r(t), 1.0 / (0.5 + 0.5 * t))
    assert np.allclose(s.phi(t), 0.25 / (0.5 + 0.5 * t) ** 4)


def test_n2_inverse_is_logarithmic():
    s = substitution(2, 1.0, math.e)
    for r in (1.1, 1.7, 2.5):
        assert s.t_of(r) == pytest.approx(1.0 - math.log(r), abs=1e-12)
    assert s.t_of(math.e) == 0.0 and s.t_of(1.0) == 1.0


def test_sources_match_callables():
    for n, mode in ((2, "derived"), (2, "paper_printed"), (3, "derived"), (6, "derived")):
        s = substitution(n, 0.7, 1.9, mode)
        t = np.linspace(0, 1, 17)
        assert np.allclose(Expression(s.r_source, ("t",))(t=t), s.r(t), rtol=1e-13)
        assert np.allclose(Expression(s.phi_source, ("t",))(t=t), s.phi(t), rtol=1e-13)


def test_printed_and_derived_weights_differ():
    a = substitution(2, 1.0, math.e, "paper_printed")
    b = substitution(2, 1.0, math.e, "derived")
    assert a.phi(0.0) == pytest.approx(b.phi(0.0))
    assert a.phi(0.5) != pytest.approx(b.phi(0.5))


@pytest.mark.parametrize("args, msg", [
    ((1, 1.0, 2.0), "integer >= 2"),
    ((2.5, 1.0, 2.0), "integer >= 2"),
    ((2, 2.0, 1.0), "0 < R1 < R0"),
    ((2, 0.0, 1.0), "0 < R1 < R0"),
    ((3, 1.0, 2.0, "paper_printed"), "only for n = 2"),
    ((2, 1.0, 2.0, "guess"), "phi mode"),
])
def test_substitution_validation(args, msg):
    with pytest.raises(ValidationError, match=msg):
        substitution(*args)


def test_t_of_range():
    with pytest.raises(ValidationError, match="outside"):
        substitution(2, 1.0, 2.0).t_of(2.5)


def test_annulus_radius_validation():
    with pytest.raises(ValidationError, match="strictly between"):
        AnnulusSpec(2, 1.0, 2.0, R_eta=2.0)


def test_build_weights_with_h():
    a = AnnulusSpec(3, 1.0, 2.0, ("r^2", "1"), R_eta=1.5, R_xi=1.8)
    red = build_weights(a)
    t = np.linspace(0, 1, 9)
    s = a.subst
    assert np.allclose(red.g[0](t), s.phi(t) * s.r(t) ** 2)
    assert np.allclose(red.g[1](t), s.phi(t))
    assert s.r(red.eta) == pytest.approx(1.5)
    assert s.r(red.xi) == pytest.approx(1.8)
    assert any("alpha2" in note for note in red.notes)
    assert red.to_dict()["phi_mode"] == "derived"


def test_build_weights_mode_override():
    a = AnnulusSpec(2, 1.0, math.e)
    red = build_weights(a, "paper_printed")
    assert red.phi_mode == "paper_printed"
    assert any("differs" in note for note in red.notes)
    assert red.eta is None and red.xi is None


def test_weight_expression_label():
    a = AnnulusSpec(2, 1.0, 2.0, ("1", "r"))
    e = weight_expression(a, 2)
    assert e(t=0.0) == pytest.approx(a.subst.phi(0.0) * 2.0)


def test_pull_back():
    a = AnnulusSpec(2, 1.0, math.e)
    rows = pull_back([lambda t: t, lambda t: 1 - t], a, samples=5)
    assert rows.shape == (5, 3)
    assert rows[0, 0] == 1.0 and rows[-1, 0] == pytest.approx(math.e)
    assert np.allclose(rows[:, 1], 1 - np.log(rows[:, 0]))
    assert np.allclose(rows[:, 1] + rows[:, 2], 1.0)
    with pytest.raises(ValidationError):
        pull_back(lambda t: t, a.subst, samples=1)
