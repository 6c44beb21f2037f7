import math

import numpy as np
import pytest
import scipy.special as sp

from magscatter.special import (SWITCH, bessel_jy, green, green_farfield_constant, green_hankel_form,
                                green_values, hankel1, hankel1_regime)

Z = np.concatenate([np.geomspace(1e-6, 1.0, 40), np.linspace(1.0, 40.0, 200), [SWITCH, SWITCH + 1e-9, 500.0]])


@pytest.mark.parametrize("order", [0, 1])
def test_bessel_matches_scipy(order):
    J, Y = bessel_jy(order, Z)
    np.testing.assert_allclose(J, sp.jv(order, Z), rtol=1e-10, atol=1e-11)
    np.testing.assert_allclose(Y, sp.yv(order, Z), rtol=1e-10, atol=1e-11)


@pytest.mark.parametrize("order", [0, 0.5, 1])
def test_hankel_matches_scipy(order):
    np.testing.assert_allclose(hankel1(order, Z), sp.hankel1(order, Z), rtol=1e-10)


def test_small_argument_logarithm():
    z = 1e-8
    expected = 1 + 2j / math.pi * (math.log(z / 2) + 0.5772156649015329)
    assert abs(hankel1(0, z) - expected) < 1e-12


def test_regimes_switch_at_threshold():
    assert hankel1_regime(0, SWITCH) == "series"
    assert hankel1_regime(0, SWITCH * 1.01) == "asymptotic"
    assert hankel1_regime(0.5, 1.0) == "closed_form"


def test_continuity_across_switch():
    lo, hi = hankel1(0, SWITCH - 1e-10), hankel1(0, SWITCH + 1e-10)
    assert abs(lo - hi) < 1e-10


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_argument_rejected(bad):
    with pytest.raises(ValueError):
        bessel_jy(0, bad)


def test_unsupported_order():
    with pytest.raises(ValueError):
        hankel1(2, 1.0)


@pytest.mark.parametrize("dim", [2, 3])
def test_green_general_hankel_form(dim):
    r = np.linspace(0.05, 20, 50)
    np.testing.assert_allclose(green_values(1.7, r, dim), green_hankel_form(1.7, r, dim), rtol=1e-10)


def test_green_3d_closed_form():
    g = green(2.0, 0.5, 3)
    assert g.regime == "closed_form"
    assert abs(g.value - np.exp(1j) / (2 * math.pi)) < 1e-15


def test_green_2d_is_quarter_i_hankel():
    g = green(1.0, 3.0, 2)
    assert abs(g.value - 0.25j * sp.hankel1(0, 3.0)) < 1e-12
    assert g.regime == "series" and g.estimated_abs_error > 0


def test_green_singular_point():
    with pytest.raises(ValueError):
        green(1.0, 0.0, 3)
    with pytest.raises(ValueError):
        green_values(1.0, [1.0, 0.0], 2)


@pytest.mark.parametrize("dim", [2, 3])
def test_farfield_constant_matches_asymptotics(dim):
    k, r = 1.3, 4000.0
    approx = green_farfield_constant(k, dim) * np.exp(1j * k * r) / r ** (0.5 * (dim - 1))
    exact = green_values(k, r, dim)
    assert abs(approx - exact) / abs(exact) < 1e-3


def test_bad_dimension():
    with pytest.raises(ValueError):
        green_values(1.0, 1.0, 4)
