import math

import numpy as np
import pytest

from magscatter import fourier, make_grid, nudft
from magscatter.transforms import lattice_frequencies, lattice_transform


def brute(f, g, xi):
    pts = g.points()
    return np.exp(1j * xi @ pts.T) @ f.ravel() * g.cell_volume


@pytest.mark.parametrize("dim", [2, 3])
def test_separable_sum_matches_brute_force(dim):
    g = make_grid(dim, 2.0, 8)
    rng = np.random.default_rng(1)
    f = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    xi = rng.normal(size=(7, dim)) * 3
    np.testing.assert_allclose(nudft(f, g, xi), brute(f, g, xi), rtol=1e-12)
    np.testing.assert_allclose(nudft(f, g, xi, sign=-1), brute(f, g, -xi), rtol=1e-12)


def test_zero_frequency_is_integral():
    g = make_grid(2, 3.0, 16)
    f = np.cos(g.coords[0]) + g.coords[1] ** 2
    assert nudft(f, g, [[0.0, 0.0]])[0] == pytest.approx(np.sum(f) * g.cell_volume)


def test_gaussian_transform():
    g = make_grid(3, 6.0, 48)
    f = np.exp(-g.r2)
    rng = np.random.default_rng(0)
    xi = rng.normal(size=(40, 3))
    xi *= (4 * rng.random(40) / np.linalg.norm(xi, axis=1))[:, None]
    exact = math.pi**1.5 * np.exp(-np.sum(xi**2, axis=1) / 4)
    assert np.max(np.abs(fourier(f, g, xi).values - exact) / exact) < 1e-4


def test_hermitian_symmetry_for_real_fields():
    g = make_grid(2, 4.0, 24)
    f = np.exp(-((g.coords[0] - 0.5) ** 2 + g.coords[1] ** 2))
    xi = np.array([[0.3, 1.2], [2.0, -0.7]])
    np.testing.assert_allclose(nudft(f, g, -xi), np.conj(nudft(f, g, xi)), rtol=1e-12)


def test_lattice_fast_path():
    g = make_grid(2, 3.0, 12)
    rng = np.random.default_rng(2)
    f = rng.normal(size=g.shape)
    np.testing.assert_allclose(lattice_transform(f, g), nudft(f, g, lattice_frequencies(g)), rtol=1e-10, atol=1e-12)
    samples = fourier(f, g)
    assert samples.values.shape == (g.size,) and samples.convention_sign == 1


def test_shape_checks():
    g = make_grid(2, 3.0, 12)
    with pytest.raises(ValueError):
        nudft(np.zeros((4, 4)), g, [[0, 0]])
    with pytest.raises(ValueError):
        nudft(np.zeros(g.shape), g, [[0, 0, 0]])
