"""
Scattering for the magnetic Schrodinger operator H = -(grad + iW)^2 + V in
two and three dimensions: Lippmann-Schwinger solves, scattering amplitudes,
first- and second-order Born approximations and backscattering inversion.
"""

__version__ = "0.1.0"

from .born import (FourierSamples, SecondOrderTerms, backscatter_born, backscatter_records, born_amplitude,
                   fourier, hemisphere_directions, improved_backscatter, invert_backscatter, remainder_bound,
                   second_order_fourier, second_order_spatial)
from .farfield import (AmplitudeRecord, DirectionSet, amplitude_integral, amplitude_values, circle_directions,
                       direction_set, farfield_fit, radial_decay_exponent, sommerfeld_residual, sphere_directions)
from .fields import (ConditionReport, Grid, PotentialData, PotentialSpec, VectorSpec, WeightedNormParams,
                     check_conditions, h1_weighted_norm, make_grid, sample_potential, weighted_norm, zero_potential)
from .kernels import convolve, kernel_table, truncated_green_ft
from .ls import (ConvergenceError, DivergenceError, LkOperator, ScatteringSolution, WaveParams, apply_Lk,
                 estimate_operator_norm, residual_pde, solve_born_series, solve_direct, tilde_u0,
                 verify_agmon_decay)
from .special import GreenEval, bessel_jy, green, green_values, hankel1
from .transforms import nudft

__all__ = [name for name in dir() if not name.startswith("_")]
