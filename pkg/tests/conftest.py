import numpy as np
import pytest

from magscatter import PotentialSpec, VectorSpec, make_grid, sample_potential


@pytest.fixture(scope="session")
def grid2():
    return make_grid(2, 6.0, 48)


@pytest.fixture(scope="session")
def grid3():
    return make_grid(3, 5.0, 20)


def gaussian(amplitude=1.0, width=1.0, center=None):
    return PotentialSpec("gaussian_bump", amplitude, width, center)


def magnetic_potential(grid, amplitude=0.3, v_amplitude=0.2, width=1.2):
    comps = tuple(gaussian(amplitude * (i + 1) / grid.dim, width, tuple(0.2 * np.arange(grid.dim) - 0.1 * i))
                  for i in range(grid.dim))
    return sample_potential(gaussian(v_amplitude, width), VectorSpec(comps), grid)


def axis_direction(dim, axis=0):
    return tuple(np.eye(dim)[axis])
