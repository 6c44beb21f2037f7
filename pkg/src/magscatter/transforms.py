"""Direct nonuniform Fourier sums on tensor-product grids."""

from __future__ import annotations

import numpy as np

from .fields import Grid

# frequencies processed per block; bounds the m^(n-1) x block intermediate
_BLOCK = 2048


def nudft(field, grid: Grid, frequencies, sign: int = +1) -> np.ndarray:
    """sum_i f(x_i) exp(sign * i (x_i, xi)) h^n for each row xi of ``frequencies``.

    The exponential factorises over axes, so the sum is contracted one axis
    at a time (a matrix product for the last axis).
    """
    f = np.asarray(field)
    if f.shape != grid.shape:
        raise ValueError("field does not live on this grid")
    xi = np.atleast_2d(np.asarray(frequencies, dtype=float))
    if xi.shape[1] != grid.dim:
        raise ValueError(f"frequencies must have {grid.dim} components")
    m, n = grid.points_per_axis, grid.dim
    x = grid.axis
    out = np.empty(len(xi), dtype=complex)
    flat = f.reshape(m ** (n - 1), m).astype(complex)
    for start in range(0, len(xi), _BLOCK):
        block = xi[start:start + _BLOCK]
        phases = [np.exp(sign * 1j * np.outer(x, block[:, d])) for d in range(n)]
        acc = flat @ phases[-1]  # (m^(n-1), B)
        for d in range(n - 2, -1, -1):
            acc = acc.reshape(-1, m, len(block))
            acc = np.einsum("amb,mb->ab", acc, phases[d])
        out[start:start + len(block)] = acc.reshape(len(block))
    return out * grid.cell_volume


def lattice_frequencies(grid: Grid) -> np.ndarray:
    """The reciprocal-lattice frequencies reachable by an FFT of the grid, in FFT order."""
    m = grid.points_per_axis
    k1 = 2.0 * np.pi * np.fft.fftfreq(m, d=grid.spacing)
    mesh = np.meshgrid(*([k1] * grid.dim), indexing="ij")
    return np.stack([c.ravel() for c in mesh], axis=1)


def lattice_transform(field, grid: Grid) -> np.ndarray:
    """F(f) at :func:`lattice_frequencies` via one FFT (kernel exp(+i x xi))."""
    f = np.asarray(field)
    m = grid.points_per_axis
    # exp(+i x xi) with x = x0 + j h and xi = 2 pi p / (m h) is the inverse DFT kernel
    spec = np.fft.ifftn(f) * f.size
    k1 = 2.0 * np.pi * np.fft.fftfreq(m, d=grid.spacing)
    shift = np.exp(1j * grid.axis[0] * k1)
    for d in range(grid.dim):
        shape = [1] * grid.dim
        shape[d] = m
        spec = spec * shift.reshape(shape)
    return spec.ravel() * grid.cell_volume
