import math

import numpy as np
import pytest

from magscatter import (AmplitudeRecord, WaveParams, amplitude_integral, amplitude_values, born_amplitude,
                        circle_directions, convolve, direction_set, farfield_fit, make_grid,
                        radial_decay_exponent, sample_potential, solve_direct, sommerfeld_residual,
                        sphere_directions, zero_potential)
from magscatter.ls import ScatteringSolution

from conftest import gaussian, magnetic_potential


@pytest.fixture(scope="module")
def scatter2():
    g = make_grid(2, 6.0, 64)
    pot = magnetic_potential(g, 0.8, 0.5)
    wave = WaveParams(1.5, (0.6, 0.8))
    return pot, solve_direct(pot, wave, tol=1e-12)


def test_direction_sets():
    c = circle_directions(16)
    assert c.weights.sum() == pytest.approx(2 * math.pi)
    s = sphere_directions(8, 16)
    assert s.weights.sum() == pytest.approx(4 * math.pi)
    np.testing.assert_allclose(np.linalg.norm(s.directions, axis=1), 1.0)
    # product rule integrates low-degree polynomials exactly
    assert np.sum(s.weights * s.directions[:, 2] ** 2) == pytest.approx(4 * math.pi / 3)
    assert len(direction_set(3)) == 16 * 32 and len(direction_set(2)) == 64
    with pytest.raises(ValueError):
        direction_set(4)


def test_record_validation():
    with pytest.raises(ValueError):
        AmplitudeRecord(1.0, (1.0, 0.1), (1.0, 0.0), 0j, "integral_3_1")
    with pytest.raises(ValueError):
        AmplitudeRecord(1.0, (1.0, 0.0), (1.0, 0.0), 0j, "guess")


def test_optical_theorem_2d(scatter2):
    pot, sol = scatter2
    ds = direction_set(2, 128)
    flux = np.sum(ds.weights * np.abs(amplitude_values(sol, pot, ds)) ** 2) / (8 * math.pi)
    forward = amplitude_values(sol, pot, np.array([sol.wave.theta]))[0]
    assert forward.imag == pytest.approx(flux, rel=1e-9)


def test_optical_theorem_3d():
    g = make_grid(3, 5.0, 24)
    pot = magnetic_potential(g, 0.8, 0.5)
    k = 1.5
    sol = solve_direct(pot, WaveParams(k, (0.0, 0.6, 0.8)), tol=1e-12)
    ds = direction_set(3, 16)
    flux = k * np.sum(ds.weights * np.abs(amplitude_values(sol, pot, ds)) ** 2) / (16 * math.pi**2)
    forward = amplitude_values(sol, pot, np.array([sol.wave.theta]))[0]
    assert forward.imag == pytest.approx(flux, rel=1e-6)


def test_reciprocity_with_reversed_field(scatter2):
    # A_W(k, theta', theta) = A_{-W}(k, -theta, -theta')
    pot, sol = scatter2
    tp = np.array([0.0, -1.0])
    a = amplitude_values(sol, pot, tp[None])[0]
    flipped = type(pot)(pot.grid, pot.V, -pot.W, -pot.divW, pot.mu, pot.c_decay)
    sol2 = solve_direct(flipped, WaveParams(1.5, tuple(-tp)), tol=1e-12)
    b = amplitude_values(sol2, flipped, -np.array([sol.wave.theta]))[0]
    assert abs(a - b) < 1e-9 * abs(a)


def test_parts_and_central_agree(scatter2):
    pot, sol = scatter2
    ds = circle_directions(8)
    a = amplitude_values(sol, pot, ds, "parts")
    b = amplitude_values(sol, pot, ds, "central")
    assert np.max(np.abs(a - b)) < 2e-2 * np.max(np.abs(a))
    with pytest.raises(ValueError):
        amplitude_values(sol, pot, ds, "bogus")


def test_weak_potential_reduces_to_born():
    g = make_grid(2, 6.0, 48)
    pot = sample_potential(gaussian(1e-4), None, g)
    wave = WaveParams(1.0, (1.0, 0.0))
    sol = solve_direct(pot, wave, tol=1e-12)
    tp = np.array([0.0, 1.0])
    a = amplitude_values(sol, pot, tp[None])[0]
    assert abs(a - born_amplitude(pot, 1.0, wave.theta, tp)) < 1e-3 * abs(a)


def test_amplitude_integral_records(scatter2):
    pot, sol = scatter2
    recs = amplitude_integral(sol, pot, circle_directions(4))
    assert len(recs) == 4 and all(r.method == "integral_3_1" for r in recs)
    bad = ScatteringSolution(sol.grid, sol.u_sc, sol.wave, "born_series", 3, 1e-2, 1e-8, converged=False)
    with pytest.raises(ValueError):
        amplitude_integral(bad, pot, circle_directions(4))


def test_zero_potential_amplitude():
    g = make_grid(2, 4.0, 16)
    pot = zero_potential(g)
    sol = solve_direct(pot, WaveParams(1.0, (1.0, 0.0)))
    assert not np.any(amplitude_values(sol, pot, circle_directions(8)))
    assert farfield_fit(sol, pot, radii=[1.0, 2.0, 3.0], theta_prime=(1.0, 0.0)) == 0


def test_farfield_fit_matches_integral():
    g = make_grid(2, 12.0, 128)
    pot = sample_potential(gaussian(1.0), None, g)
    sol = solve_direct(pot, WaveParams(2.0, (1.0, 0.0)), tol=1e-10)
    radii = np.linspace(6.0, 9.6, 12)
    for tp in [(-1.0, 0.0), (0.0, 1.0), (0.6, 0.8)]:
        fit = farfield_fit(sol, pot, radii=radii, theta_prime=tp)
        ref = amplitude_values(sol, pot, np.array([tp]))[0]
        assert abs(fit - ref) < 1e-2 * abs(ref)


def test_farfield_fit_guards():
    g = make_grid(2, 6.0, 32)
    pot = sample_potential(gaussian(1.0), None, g)
    sol = solve_direct(pot, WaveParams(1.0, (1.0, 0.0)))
    with pytest.raises(ValueError):
        farfield_fit(sol, pot, radii=[1.0, 2.0], theta_prime=(1.0, 0.0))
    with pytest.raises(ValueError):
        farfield_fit(sol, pot, radii=[3.0, 4.0, 5.5], theta_prime=(1.0, 0.0))
    with pytest.raises(ValueError):
        farfield_fit(sol, pot, radii=[0.5, 1.0, 2.0], theta_prime=(1.0, 0.0))  # potential not decayed


@pytest.mark.parametrize("dim,m", [(2, 128), (3, 48)])
def test_outgoing_field_decay_and_radiation(dim, m):
    g = make_grid(dim, 10.0, m)
    f = np.exp(-g.r2 / 0.5)
    k = 2.0
    u = convolve(f.astype(complex), g, k)
    radii = np.linspace(5.0, 8.0, 10)
    tp = np.eye(dim)[0]
    assert radial_decay_exponent(u, g, tp, radii) == pytest.approx(0.5 * (dim - 1), abs=0.05)
    out = sommerfeld_residual(u, g, k, 7.0, direction_set(dim, 8))
    inc = sommerfeld_residual(np.conj(u), g, k, 7.0, direction_set(dim, 8))
    assert out < 0.1 * inc
    assert sommerfeld_residual(np.zeros(g.shape), g, k, 7.0) == 0.0
