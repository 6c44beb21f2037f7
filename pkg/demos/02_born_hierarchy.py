"""
How good is the Born approximation, and what does the second-order term buy?

Scaling a potential by eps, the backscattering error of the first Born
approximation shrinks like eps^2; adding the four second-order terms
(I1..I4) pushes it to eps^3.  For a purely magnetic field without a scalar
part the backscattered amplitude is even in eps, so the corrected error
drops straight to eps^4.
"""

import numpy as np

from magscatter import (PotentialSpec, VectorSpec, WaveParams, amplitude_values, backscatter_born, make_grid,
                        sample_potential, second_order_fourier, solve_direct)

grid = make_grid(3, 6.0, 32)
k, theta = 2.0, np.array([0.0, 0.0, 1.0])
eps = np.array([0.05, 0.1, 0.2])


def sweep(base, label):
    e1, e2 = [], []
    for e in eps:
        pot = base.scaled(e)
        sol = solve_direct(pot, WaveParams(k, tuple(theta)), tol=1e-11)
        A = amplitude_values(sol, pot, -theta[None, :])[0]
        AB = backscatter_born(pot, k, theta)
        terms = second_order_fourier(pot, k, theta)
        e1.append(abs(A - AB))
        e2.append(abs(A - AB - terms.total))
        print(f"  {label} eps={e:<5} |A-A_B|={e1[-1]:.3e}  |A-A_B-sum I|={e2[-1]:.3e}")
    s1, s2 = np.polyfit(np.log(eps), np.log(e1), 1)[0], np.polyfit(np.log(eps), np.log(e2), 1)[0]
    print(f"  {label} slopes: {s1:.2f} (Born), {s2:.2f} (with second order)\n")


print("scalar Gaussian:")
sweep(sample_potential(PotentialSpec("gaussian_bump", 1.0, 1.0), None, grid), "V")

print("magnetic only (bump plus gradient of a Gaussian):")
comps = (PotentialSpec("gaussian_bump", 1.0, 1.0, (0.3, 0.0, 0.0)), PotentialSpec("gaussian_bump", 0.0),
         PotentialSpec("gaussian_bump", 0.5, 1.0))
gauge = PotentialSpec("gaussian_bump", 1.0, 1.2, (0.0, 0.4, 0.0))
sweep(sample_potential(None, VectorSpec(comps, gauge=gauge), grid), "W")
