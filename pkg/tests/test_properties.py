import math

import numpy as np
from hypothesis import given, settings, strategies as st

from magscatter import (WaveParams, apply_Lk, born_amplitude, make_grid, remainder_bound, sample_potential,
                        PotentialSpec, VectorSpec)
from magscatter.born import born_linear_term
from magscatter.special import hankel1

import scipy.special as sp

GRID = make_grid(2, 4.0, 24)
# the unit Gaussian generator has decayed to rounding at the edge and is free of aliasing up to |xi| = 6
WIDE = make_grid(2, 7.0, 48)
unit_angle = st.floats(0, 2 * math.pi, allow_nan=False)


def _dir(a):
    return np.array([math.cos(a), math.sin(a)])


@given(st.floats(1e-6, 200.0))
def test_hankel_against_scipy(z):
    assert abs(hankel1(0, z) - sp.hankel1(0, z)) <= 1e-10 * max(1.0, abs(sp.hankel1(0, z)))


@settings(max_examples=30, deadline=None)
@given(unit_angle, unit_angle, st.floats(0.2, 3.0), st.floats(0.3, 2.0))
def test_gauge_linear_term_vanishes(a, b, k, amp):
    pot = sample_potential(None, PotentialSpec("pure_gauge", generator=PotentialSpec("gaussian_bump", amp, 1.0)), WIDE)
    assert abs(born_linear_term(pot, k, _dir(a), _dir(b))) < 1e-10 * amp


@settings(max_examples=20, deadline=None)
@given(unit_angle, st.floats(0.2, 3.0))
def test_born_amplitude_hermitian_for_real_potential(a, k):
    pot = sample_potential(PotentialSpec("gaussian_bump", 0.4, 1.0, (0.3, -0.2)), None, GRID)
    th = _dir(a)
    # F(q)(-xi) = conj F(q)(xi): swapping the roles of the directions conjugates the scalar part
    assert abs(born_amplitude(pot, k, th, -th) - np.conj(born_amplitude(pot, k, -th, th))) < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.5, 2.5))
def test_operator_linearity(alpha, beta, k):
    pot = sample_potential(PotentialSpec("gaussian_bump", 0.3), VectorSpec((PotentialSpec("gaussian_bump", 0.2),) * 2), GRID)
    rng = np.random.default_rng(0)
    f, g = rng.normal(size=(2,) + GRID.shape)
    lhs = apply_Lk(pot, k, alpha * f + beta * g)
    rhs = alpha * apply_Lk(pot, k, f) + beta * apply_Lk(pot, k, g)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.max(np.abs(lhs)))


@given(st.floats(0, 10), st.floats(0, 0.99), st.floats(0, 10), st.floats(0, 0.99))
def test_remainder_bound_monotone(c0, c1, d0, d1):
    lo = remainder_bound(min(c0, d0), min(c1, d1))
    hi = remainder_bound(max(c0, d0), max(c1, d1))
    assert lo <= hi * (1 + 1e-15)


@given(st.floats(0.1, 5.0), unit_angle)
def test_wave_params_normalised(k, a):
    w = WaveParams(k, tuple(_dir(a)))
    assert abs(np.linalg.norm(w.direction) - 1) <= 1e-12
