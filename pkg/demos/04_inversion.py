"""
Recovering a potential from backscattering data.

The Born backscattering amplitude at wave number k and direction theta is
the Fourier transform of q at xi = 2 k theta.  Collecting it over a band of
k and half a circle of directions fills an annulus in Fourier space; an
inverse transform then locates the scatterer.  We do this with exact data
and with data from the full solver on a weak potential.
"""

import math

import numpy as np

from magscatter import (PotentialSpec, WaveParams, amplitude_values, backscatter_records, hemisphere_directions,
                        invert_backscatter, make_grid, sample_potential, solve_direct)

center = np.array([0.7, -0.4])
out = make_grid(2, 5.0, 40)
dirs = hemisphere_directions(2, 32)


def report(label, rec):
    idx = np.unravel_index(np.argmax(rec), rec.shape)
    peak = [out.axis[i] for i in idx]
    print(f"{label}: peak at ({peak[0]:+.3f}, {peak[1]:+.3f}), true centre ({center[0]:+.3f}, {center[1]:+.3f})")


def exact(k, th):
    xi = 2 * k * np.asarray(th)
    return -math.pi * np.exp(-xi @ xi / 4) * np.exp(1j * xi @ center)


report("exact Born data", invert_backscatter(backscatter_records(exact, np.linspace(0.5, 4.0, 30), dirs), out))

eps = 0.05
grid = make_grid(2, 8.0, 64)
pot = sample_potential(PotentialSpec("gaussian_bump", eps, 1.0, tuple(center)), None, grid)


def measured(k, th):
    sol = solve_direct(pot, WaveParams(k, tuple(th)), tol=1e-10)
    return amplitude_values(sol, pot, -np.asarray(th)[None, :])[0] / eps


report("solver data", invert_backscatter(backscatter_records(measured, np.linspace(0.5, 4.0, 16), dirs,
                                                             "integral_3_1"), out))
