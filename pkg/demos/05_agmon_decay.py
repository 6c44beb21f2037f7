"""
The resolvent gains a factor 1/k between weighted spaces.

Applying the outgoing Green's function to a fixed probe and measuring the
weighted norm ratio at several k, the product k * ratio should stay
roughly constant.  The probe must be narrow enough that its spectrum
reaches the |xi| = k shell at every k tested.
"""

import numpy as np

from magscatter import make_grid, verify_agmon_decay

grid = make_grid(2, 12.8, 256)
probe = np.exp(-grid.r2 / 0.25**2)
for row in verify_agmon_decay(grid, 1.0, [1.0, 2.0, 4.0, 8.0], probe):
    print(f"k = {row.k:<4}  ratio = {row.ratio:.4e}  k * ratio = {row.scaled:.4f}")
