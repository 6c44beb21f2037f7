import math
import warnings

import numpy as np
import pytest

from magscatter import (PotentialSpec, VectorSpec, WeightedNormParams, check_conditions, h1_weighted_norm,
                        make_grid, sample_potential, weighted_norm, zero_potential)
from magscatter.fields import _profile, weight

from conftest import gaussian


def test_grid_geometry():
    g = make_grid(3, 2.0, 8)
    assert g.spacing == 0.5 and g.shape == (8, 8, 8) and g.size == 512
    assert g.cell_volume == 0.125
    np.testing.assert_allclose(g.axis, -2.0 + 0.25 + 0.5 * np.arange(8))
    assert g.points().shape == (512, 3)
    assert np.all(g.radius > 0)


@pytest.mark.parametrize("args", [(4, 1.0, 8), (2, -1.0, 8), (2, 1.0, 7), (2, 1.0, 6)])
def test_grid_validation(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_gaussian_sampled_exactly():
    g = make_grid(2, 4.0, 16)
    pot = sample_potential(gaussian(2.0, 1.5, (0.5, -0.25)), None, g)
    X, Y = np.meshgrid(g.axis, g.axis, indexing="ij")
    np.testing.assert_allclose(pot.V, 2.0 * np.exp(-((X - 0.5) ** 2 + (Y + 0.25) ** 2) / 2.25))
    assert not pot.has_magnetic and pot.mu == math.inf


@pytest.mark.parametrize("family,extra", [("gaussian_bump", {}), ("power_tail", {"mu": 3.5})])
def test_gauge_divergence_is_analytic_laplacian(family, extra):
    # finite differences of the sampled gradient converge to the analytic Laplacian at O(h^2)
    spec = PotentialSpec(family, 0.7, 2.0, **extra)
    errors = []
    for m in (64, 128):
        g = make_grid(2, 5.0, m)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pot = sample_potential(None, PotentialSpec("pure_gauge", generator=spec), g)
        fd = sum(np.gradient(pot.W[a], g.spacing, axis=a, edge_order=2) for a in range(2))
        inner = (slice(4, -4),) * 2
        errors.append(np.max(np.abs(fd[inner] - pot.divW[inner])) / np.max(np.abs(pot.divW)))
    assert errors[1] < 1e-2
    assert errors[0] / errors[1] > 3.0


@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("family,extra", [("gaussian_bump", {}), ("power_tail", {"mu": 2.5}),
                                          ("smooth_compact_bump", {})])
def test_profile_derivatives(family, extra, dim):
    spec = PotentialSpec(family, 1.3, 1.7, **extra)
    r = np.linspace(0.2, 1.6, 15)
    step = 1e-4
    g, dg, lap = _profile(spec, r, dim)
    gp, _, _ = _profile(spec, r + step, dim)
    gm, _, _ = _profile(spec, r - step, dim)
    d1 = (gp - gm) / (2 * step)
    d2 = (gp - 2 * g + gm) / step**2
    np.testing.assert_allclose(dg, d1, rtol=2e-5, atol=1e-8)
    np.testing.assert_allclose(lap, d2 + (dim - 1) / r * d1, rtol=1e-4, atol=1e-6)


def test_q_tilde_and_scaling():
    g = make_grid(2, 4.0, 16)
    pot = sample_potential(gaussian(0.5), VectorSpec((gaussian(0.3), gaussian(0.2))), g)
    np.testing.assert_allclose(pot.q_tilde, pot.W[0] ** 2 + pot.W[1] ** 2 + pot.V)
    s = pot.scaled(0.1)
    np.testing.assert_allclose(s.q_tilde, 0.01 * (pot.W[0] ** 2 + pot.W[1] ** 2) + 0.1 * pot.V)
    np.testing.assert_allclose(s.divW, 0.1 * pot.divW)


def test_spec_scaling_matches_data_scaling():
    g = make_grid(2, 4.0, 16)
    vec = VectorSpec((gaussian(0.3), None), gauge=gaussian(0.5, 1.3))
    a = sample_potential(None, vec.scaled(0.2), g)
    b = sample_potential(None, vec, g).scaled(0.2)
    np.testing.assert_allclose(a.W, b.W, atol=1e-15)
    np.testing.assert_allclose(a.divW, b.divW, atol=1e-15)


def test_invalid_specs():
    g = make_grid(2, 4.0, 16)
    with pytest.raises(ValueError):
        PotentialSpec("unknown")
    with pytest.raises(ValueError):
        PotentialSpec("power_tail")
    with pytest.raises(ValueError):
        PotentialSpec("pure_gauge")
    with pytest.raises(ValueError):
        sample_potential(PotentialSpec("pure_gauge", generator=gaussian()), None, g)
    with pytest.raises(ValueError):
        sample_potential(PotentialSpec("smooth_compact_bump", width=5.0), None, g)
    with pytest.raises(ValueError):
        sample_potential(gaussian(center=(0.0, 0.0, 0.0)), None, g)


def test_tail_warning():
    g = make_grid(2, 3.0, 16)
    with pytest.warns(UserWarning):
        sample_potential(PotentialSpec("power_tail", 1.0, 1.0, mu=2.5), None, g)


def test_zero_potential():
    pot = zero_potential(make_grid(2, 2.0, 8))
    assert pot.is_zero and not np.any(pot.q_tilde)


def test_weighted_norms():
    g = make_grid(2, 4.0, 32)
    f = np.ones(g.shape)
    w = weight(g, 1.0)
    assert weighted_norm(f, g, WeightedNormParams(2.0, 1.0)) == pytest.approx(np.sqrt(np.sum(w**2) * g.cell_volume))
    assert weighted_norm(f, g, WeightedNormParams(math.inf, 0.0)) == 1.0
    assert weighted_norm(f, g, WeightedNormParams(2.0, -1.0)) < weighted_norm(f, g, WeightedNormParams(2.0, 0.0))
    with pytest.raises(ValueError):
        weighted_norm(np.full(g.shape, np.nan), g)
    assert h1_weighted_norm(f, g) == pytest.approx(weighted_norm(f, g, WeightedNormParams(2.0, -1.0)), rel=1e-12)


def test_conditions_reject_slow_decay():
    g = make_grid(3, 6.0, 16)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pot = sample_potential(PotentialSpec("power_tail", 1.0, 1.0, mu=1.5), None, g)
    report = check_conditions(pot)
    assert not report.passed and not report.mu_ok
    assert any("mu > 2" in r for r in report.reasons)


def test_conditions_accept_gaussian():
    pot = sample_potential(gaussian(), None, make_grid(3, 6.0, 16))
    report = check_conditions(pot)
    assert report.passed and report.decay_ok
    assert report.delta_threshold == 2.0
    assert "passed" in report.to_dict()


def test_conditions_delta_threshold():
    pot = sample_potential(gaussian(), None, make_grid(2, 6.0, 16))
    report = check_conditions(pot, p=2.0, delta=0.4)
    assert not report.delta_ok and report.delta_threshold == 0.5
