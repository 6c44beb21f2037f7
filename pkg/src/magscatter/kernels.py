"""
Discrete convolution kernels for G_k^+ on a cell-centred grid.

Two tables are available, both indexed by lattice offset j in [-m, m)^n and
already multiplied by the cell volume:

``corrected``
    h^n G_k^+(h|j|) off the origin; the self-cell weight is the exact
    integral of G_k^+ over the ball with the volume of one cell.
``spectral``
    The kernel truncated at the box diameter R, whose Fourier transform is
    known in closed form, sampled on a 3x oversampled FFT lattice and brought
    back to physical space.  For sources resolved by the grid this makes
    the discrete convolution accurate to rounding.

Convolution is aperiodic: sources are zero-padded to 2m points per axis.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .fields import Grid
from .special import bessel_jy, green_values, hankel1

KERNELS = ("spectral", "corrected")
OVERSAMPLE = 3
DENSE_MAX_POINTS = 6000


def _j01(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # J0, J1 at z >= 0 (J0(0) = 1, J1(0) = 0)
    J0 = np.ones_like(z)
    J1 = np.zeros_like(z)
    pos = z > 0
    if np.any(pos):
        J0[pos] = bessel_jy(0, z[pos])[0]
        J1[pos] = bessel_jy(1, z[pos])[0]
    return J0, J1


def _truncated_closed_form(s: np.ndarray, k: float, R: float, dim: int) -> np.ndarray:
    """Closed form of int_{|x|<R} G_k^+(|x|) e^{-i s.x} dx, valid away from s = k."""
    den = s * s - k * k
    if dim == 3:
        sinc = R * np.sinc(s * R / math.pi)  # sin(sR)/s
        num = 1.0 - np.exp(1j * k * R) * (np.cos(s * R) - 1j * k * sinc)
        return num / den
    J0, J1 = _j01(s * R)
    H0 = hankel1(0, k * R)
    H1 = hankel1(1, k * R)
    num = 1.0 + 0.5j * math.pi * R * (s * J1 * H0 - k * J0 * H1)
    return num / den


def truncated_green_ft(s, k: float, R: float, dim: int) -> np.ndarray:
    """Fourier transform of G_k^+ restricted to the ball |x| < R, at |s| = ``s``.

    The removable singularity at s = k is bridged by symmetric 8-point
    polynomial interpolation from nodes outside a window of width 0.05/R.
    """
    s = np.asarray(s, dtype=float)
    out = np.empty(s.shape, dtype=complex)
    step = 0.05 / R
    near = np.abs(s - k) < step
    out[~near] = _truncated_closed_form(s[~near], k, R, dim)
    if np.any(near):
        offsets = np.array([-4, -3, -2, -1, 1, 2, 3, 4], dtype=float) * step
        nodes = k + offsets
        vals = _truncated_closed_form(nodes, k, R, dim)
        t = s[near]
        acc = np.zeros(t.shape, dtype=complex)
        for i, (xi, vi) in enumerate(zip(nodes, vals)):
            basis = np.ones_like(t)
            for j, xj in enumerate(nodes):
                if j != i:
                    basis *= (t - xj) / (xi - xj)
            acc += vi * basis
        out[near] = acc
    return out


def self_cell_weight(k: float, h: float, dim: int) -> complex:
    """Integral of G_k^+ over the ball whose volume equals one grid cell."""
    if dim == 3:
        a = h * (3.0 / (4.0 * math.pi)) ** (1.0 / 3.0)
        return complex((np.exp(1j * k * a) * (1.0 - 1j * k * a) - 1.0) / k**2)
    a = h / math.sqrt(math.pi)
    # (i pi / 2) int_0^a H0(kr) r dr, using d/dr [r H1(kr)] = k r H0(kr)
    return complex(0.5j * math.pi * a * hankel1(1, k * a) / k - 1.0 / k**2)


def _offsets(m: int, dim: int) -> list:
    j = np.fft.fftfreq(2 * m, d=1.0 / (2 * m))  # 0..m-1, -m..-1
    return np.meshgrid(*([j] * dim), indexing="ij", sparse=True)


def _corrected_table(grid: Grid, k: float) -> np.ndarray:
    m, h, n = grid.points_per_axis, grid.spacing, grid.dim
    offs = _offsets(m, n)
    r = h * np.sqrt(sum(o * o for o in offs) + np.zeros((2 * m,) * n))
    table = np.zeros(r.shape, dtype=complex)
    pos = r > 0
    table[pos] = green_values(k, r[pos], n) * h**n
    table[(0,) * n] = self_cell_weight(k, h, n)
    return table


def _spectral_table(grid: Grid, k: float) -> np.ndarray:
    m, h, n = grid.points_per_axis, grid.spacing, grid.dim
    N = OVERSAMPLE * m
    R = math.sqrt(n) * 2.0 * grid.half_width
    # period N h = 3 (2L) exceeds R + 2L, so periodic images never reach the box
    p = np.fft.fftfreq(N, d=1.0 / N).astype(np.int64)
    grids = np.meshgrid(*([p] * n), indexing="ij", sparse=True)
    sq = sum(g * g for g in grids) + np.zeros((N,) * n, dtype=np.int64)
    uniq, inverse = np.unique(sq, return_inverse=True)
    ds = 2.0 * math.pi / (N * h)
    values = truncated_green_ft(ds * np.sqrt(uniq.astype(float)), k, R, n)
    spectrum = values[inverse].reshape(sq.shape)
    del sq, inverse
    full = np.fft.ifftn(spectrum)
    idx = np.concatenate([np.arange(m), np.arange(N - m, N)])
    return full[np.ix_(*([idx] * n))]


@lru_cache(maxsize=8)
def kernel_table(grid: Grid, k: float, kind: str = "spectral") -> np.ndarray:
    """Kernel weights for offsets in FFT order, shape (2m,)*n; offset -m is unused."""
    if k <= 0:
        raise ValueError("wavenumber k must be positive")
    if kind == "spectral":
        table = _spectral_table(grid, k)
    elif kind == "corrected":
        table = _corrected_table(grid, k)
    else:
        raise ValueError(f"unknown kernel kind {kind!r}; expected one of {KERNELS}")
    table.setflags(write=False)
    return table


@lru_cache(maxsize=8)
def kernel_spectrum(grid: Grid, k: float, kind: str = "spectral") -> np.ndarray:
    spec = np.fft.fftn(kernel_table(grid, k, kind))
    spec.setflags(write=False)
    return spec


def convolve_fft(source: np.ndarray, grid: Grid, k: float, kind: str = "spectral") -> np.ndarray:
    m = grid.points_per_axis
    spec = kernel_spectrum(grid, k, kind)
    padded = np.fft.fftn(source, s=(2 * m,) * grid.dim, axes=tuple(range(grid.dim)))
    out = np.fft.ifftn(padded * spec)
    return out[(slice(0, m),) * grid.dim]


def convolve_dense(source: np.ndarray, grid: Grid, k: float, kind: str = "spectral") -> np.ndarray:
    """Direct O(N^2) summation with the same kernel table (small grids only)."""
    if grid.size > DENSE_MAX_POINTS:
        raise ValueError(f"dense quadrature limited to {DENSE_MAX_POINTS} points, grid has {grid.size}")
    m, n = grid.points_per_axis, grid.dim
    table = kernel_table(grid, k, kind)
    idx = np.indices(grid.shape).reshape(n, -1)
    src = np.asarray(source, dtype=complex).ravel()
    out = np.empty(grid.size, dtype=complex)
    rows = max(1, 2_000_000 // grid.size)
    for start in range(0, grid.size, rows):
        sl = slice(start, start + rows)
        diff = (idx[:, sl, None] - idx[:, None, :]) % (2 * m)
        out[sl] = table[tuple(diff)] @ src
    return out.reshape(grid.shape)


def convolve(source: np.ndarray, grid: Grid, k: float, kind: str = "spectral",
             mode: str = "fft") -> np.ndarray:
    """Discrete aperiodic convolution of ``source`` with G_k^+."""
    if np.shape(source) != grid.shape:
        raise ValueError("source does not live on this grid")
    if mode in ("fft", "fft_convolution"):
        return convolve_fft(source, grid, k, kind)
    if mode in ("dense", "dense_quadrature"):
        return convolve_dense(source, grid, k, kind)
    raise ValueError(f"unknown quadrature mode {mode!r}")
