import math

import numpy as np
import pytest
import scipy.integrate as si
import scipy.special as sp

from magscatter import PotentialSpec, convolve, kernel_table, make_grid, sample_potential, truncated_green_ft
from magscatter.kernels import self_cell_weight
from magscatter.ls import green_identity_error

from conftest import gaussian


def quad_complex(func, a, b, **kw):
    re = si.quad(lambda r: func(r).real, a, b, limit=400, **kw)[0]
    im = si.quad(lambda r: func(r).imag, a, b, limit=400, **kw)[0]
    return re + 1j * im


@pytest.mark.parametrize("s", [0.0, 0.4, 1.0, 1.0 + 1e-4, 1.003, 2.5])
def test_truncated_transform_3d(s):
    k, R = 1.0, 4.0
    def integrand(r):
        kern = r if s == 0 else math.sin(s * r) / s
        return np.exp(1j * k * r) * kern
    assert abs(truncated_green_ft(s, k, R, 3) - quad_complex(integrand, 0, R)) < 1e-9


@pytest.mark.parametrize("s", [0.0, 0.7, 1.5, 1.5 + 2e-4, 3.0])
def test_truncated_transform_2d(s):
    k, R = 1.5, 3.0
    def integrand(r):
        return 0.25j * sp.hankel1(0, k * r) * sp.j0(s * r) * 2 * math.pi * r
    exact = quad_complex(integrand, 0, R, points=[1e-8])
    assert abs(truncated_green_ft(s, k, R, 2) - exact) < 1e-8


@pytest.mark.parametrize("dim", [2, 3])
def test_self_cell_weight_is_ball_integral(dim):
    k, h = 1.3, 0.4
    if dim == 3:
        a = h * (3 / (4 * math.pi)) ** (1 / 3)
        exact = quad_complex(lambda r: np.exp(1j * k * r) * r, 0, a)
    else:
        a = h / math.sqrt(math.pi)
        exact = quad_complex(lambda r: 0.25j * sp.hankel1(0, k * r) * 2 * math.pi * r, 0, a, points=[1e-9])
    assert abs(self_cell_weight(k, h, dim) - exact) < 1e-10


@pytest.mark.parametrize("kind", ["spectral", "corrected"])
def test_fft_and_dense_agree(kind):
    g = make_grid(2, 3.0, 16)
    rng = np.random.default_rng(4)
    f = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    a = convolve(f, g, 1.2, kind, "fft")
    b = convolve(f, g, 1.2, kind, "dense")
    np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-12)


def test_corrected_table_off_origin_is_green():
    g = make_grid(3, 2.0, 8)
    t = kernel_table(g, 1.0, "corrected")
    h = g.spacing
    assert t[1, 2, 0] == pytest.approx(np.exp(1j * h * math.sqrt(5)) / (4 * math.pi * h * math.sqrt(5)) * h**3)
    assert t[0, 0, 0] == self_cell_weight(1.0, h, 3)


def test_convolution_is_linear():
    g = make_grid(3, 2.0, 8)
    rng = np.random.default_rng(5)
    f1, f2 = rng.normal(size=(2,) + g.shape)
    lhs = convolve(2 * f1 - 3j * f2, g, 0.8)
    np.testing.assert_allclose(lhs, 2 * convolve(f1, g, 0.8) - 3j * convolve(f2, g, 0.8), atol=1e-13)


def test_spectral_convolution_matches_direct_quadrature_far_away():
    # away from the source, the kernel is smooth and plain midpoint quadrature is accurate
    g = make_grid(3, 4.0, 32)
    f = sample_potential(gaussian(1.0, 0.6), None, g).V
    u = convolve(f, g, 1.0)
    idx = (31, 16, 16)
    x = g.points().reshape(g.shape + (3,))[idx]
    r = np.linalg.norm(g.points() - x, axis=1)
    far = r > 0  # f is ~1e-50 at the evaluation point itself
    direct = np.sum(np.exp(1j * r[far]) / (4 * math.pi * r[far]) * f.ravel()[far]) * g.cell_volume
    assert abs(u[idx] - direct) / abs(direct) < 1e-6


@pytest.mark.parametrize("dim,m", [(2, 64), (3, 24)])
def test_green_identity_second_order(dim, m):
    errs = []
    for mm in (m, 2 * m):
        g = make_grid(dim, 5.0, mm)
        f = sample_potential(PotentialSpec("smooth_compact_bump", 1.0, 3.5), None, g).V
        errs.append(green_identity_error(f, g, 1.5))
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_errors():
    g = make_grid(2, 3.0, 16)
    with pytest.raises(ValueError):
        kernel_table(g, 1.0, "bogus")
    with pytest.raises(ValueError):
        kernel_table(g, -1.0)
    with pytest.raises(ValueError):
        convolve(np.zeros(g.shape), g, 1.0, mode="bogus")
    with pytest.raises(ValueError):
        convolve(np.zeros((3, 3)), g, 1.0)
    with pytest.raises(ValueError):
        convolve(np.zeros((96, 96)), make_grid(2, 3.0, 96), 1.0, mode="dense")
