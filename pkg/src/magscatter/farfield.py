"""
Scattering amplitude from a computed solution.

Two independent routes:

* the volume integral  A(k, theta', theta) = int e^{-ik(theta', y)} s(u)(y) dy,
* fitting the far-field form  u_sc ~ c_n k^{(n-3)/2} e^{ikr} r^{-(n-1)/2} A
  along a ray, with c_n k^{(n-3)/2} from :func:`special.green_farfield_constant`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.ndimage import map_coordinates

from .fields import TAIL_TOLERANCE, Grid, PotentialData
from .ls import ScatteringSolution, central_gradient, incident_wave
from .special import green_farfield_constant
from .transforms import nudft

METHODS = ("integral_3_1", "farfield_fit", "born_first_order", "born_improved")


@dataclass(frozen=True)
class AmplitudeRecord:
    k: float
    theta: tuple
    theta_prime: tuple
    value: complex
    method: str

    def __post_init__(self):
        for v in (self.theta, self.theta_prime):
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValueError("amplitude directions must be unit vectors")
        if self.method not in METHODS:
            raise ValueError(f"unknown amplitude method {self.method!r}")


@dataclass(frozen=True, eq=False)
class DirectionSet:
    dim: int
    directions: np.ndarray  # (N, dim)
    weights: np.ndarray  # sums to the sphere area

    def __len__(self) -> int:
        return len(self.directions)


def circle_directions(count: int = 64, offset: float = 0.0) -> DirectionSet:
    phi = offset + 2.0 * math.pi * np.arange(count) / count
    dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    return DirectionSet(2, dirs, np.full(count, 2.0 * math.pi / count))


def sphere_directions(n_polar: int = 16, n_azimuth: int = 32) -> DirectionSet:
    """Latitude-longitude product rule: Gauss-Legendre in cos(polar), equispaced azimuth."""
    c, wc = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * math.pi * (np.arange(n_azimuth) + 0.5) / n_azimuth
    C, P = np.meshgrid(c, phi, indexing="ij")
    S = np.sqrt(1.0 - C * C)
    dirs = np.stack([S * np.cos(P), S * np.sin(P), C], axis=-1).reshape(-1, 3)
    weights = np.outer(wc, np.full(n_azimuth, 2.0 * math.pi / n_azimuth)).ravel()
    return DirectionSet(3, dirs, weights)


def direction_set(dim: int, order: Optional[int] = None) -> DirectionSet:
    """Default quadrature over S^{n-1}: 64 angles in 2D, 16 x 32 in 3D."""
    if dim == 2:
        return circle_directions(order or 64)
    if dim == 3:
        n = order or 16
        return sphere_directions(n, 2 * n)
    raise ValueError("dim must be 2 or 3")


def _directions(theta_prime_set, dim: int) -> np.ndarray:
    if isinstance(theta_prime_set, DirectionSet):
        return theta_prime_set.directions
    d = np.atleast_2d(np.asarray(theta_prime_set, dtype=float))
    if d.shape[1] != dim:
        raise ValueError("direction dimension mismatch")
    return d


def amplitude_values(solution: ScatteringSolution, potential: PotentialData, theta_primes,
                     gradient: str = "parts") -> np.ndarray:
    """A(k, theta', theta) for each row of ``theta_primes``.

    ``gradient="parts"`` moves every derivative of u_sc onto the smooth
    factor e^{-ik(theta', y)} W(y) by integration by parts, so no
    differences of u_sc are needed; ``"central"`` differentiates u_sc by
    central differences instead.
    """
    grid = solution.grid
    k = solution.wave.k
    theta = solution.wave.direction
    dirs = _directions(theta_primes, grid.dim)
    if potential.is_zero:
        return np.zeros(len(dirs), dtype=complex)
    u0 = incident_wave(grid, solution.wave)
    usc = solution.u_sc
    u = u0 + usc
    W = potential.W
    w_theta = sum(t * w for t, w in zip(theta, W))
    freqs = -k * dirs
    if gradient == "parts":
        # A = F(g)(-k theta') - k theta'.F(W (u + u_sc))(-k theta')
        g = -k * w_theta * u0 - 1j * potential.divW * usc - potential.q_tilde * u
        out = nudft(g, grid, freqs)
        if potential.has_magnetic:
            for axis in range(grid.dim):
                out -= k * dirs[:, axis] * nudft(W[axis] * (u + usc), grid, freqs)
        return out
    if gradient == "central":
        grads = central_gradient(usc, grid)
        grad_w = sum(w * (1j * k * t * u0 + gr) for w, t, gr in zip(W, theta, grads))
        g = 1j * grad_w - potential.q_tilde * u
        out = nudft(g, grid, freqs)
        if potential.has_magnetic:
            # i div(W u) integrated against e^{-ik theta'.y} gives -k theta'.F(W u)
            for axis in range(grid.dim):
                out -= k * dirs[:, axis] * nudft(W[axis] * u, grid, freqs)
        return out
    raise ValueError(f"unknown gradient treatment {gradient!r}")


def amplitude_integral(solution: ScatteringSolution, potential: PotentialData, theta_prime_set,
                       gradient: str = "parts") -> list:
    """Scattering amplitude by the volume-integral formula, one record per direction."""
    if not solution.converged or solution.linear_residual > solution.tol:
        raise ValueError(f"solution not converged (residual {solution.linear_residual:.2e} > tol {solution.tol:.1e})")
    dirs = _directions(theta_prime_set, solution.grid.dim)
    values = amplitude_values(solution, potential, dirs, gradient)
    th = solution.wave.theta
    return [AmplitudeRecord(solution.wave.k, th, tuple(d), complex(v), "integral_3_1")
            for d, v in zip(dirs, values)]


# ----------------------------------------------------------------------------
# ray sampling


def _ray_indices(grid: Grid, points: np.ndarray) -> np.ndarray:
    h = grid.spacing
    return ((points - grid.axis[0]) / h).T


def sample_along(field: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Cubic-spline interpolation of a complex grid field at arbitrary points."""
    coords = _ray_indices(grid, np.atleast_2d(points))
    re = map_coordinates(np.real(field), coords, order=3, mode="nearest")
    im = map_coordinates(np.imag(field), coords, order=3, mode="nearest")
    return re + 1j * im


def _check_radii(grid: Grid, radii: np.ndarray) -> None:
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    if np.max(radii) > 0.8 * grid.half_width + 1e-12:
        raise ValueError("radii beyond 0.8 * half_width approach the box corners (anisotropic truncation)")


def farfield_fit(solution: ScatteringSolution, potential: PotentialData, k: Optional[float] = None,
                 radii: Sequence[float] = (), theta_prime=None, terms: int = 3,
                 tail_tolerance: float = TAIL_TOLERANCE) -> complex:
    """Fit A from u_sc sampled along the ray r theta'.

    The normalised samples u_sc r^{(n-1)/2} e^{-ikr} / (c_n k^{(n-3)/2}) are
    fitted by a polynomial in 1/r whose constant term is returned.
    """
    grid = solution.grid
    k = solution.wave.k if k is None else k
    radii = np.asarray(radii, dtype=float)
    if len(radii) < 3:
        raise ValueError("need at least 3 radii")
    _check_radii(grid, radii)
    if potential.is_zero:
        return 0j
    peak = max(np.max(np.abs(potential.q_tilde)), np.max(np.abs(potential.W)))
    outside = grid.radius >= radii.min()
    tail = max(np.max(np.abs(potential.q_tilde[outside]), initial=0.0),
               np.max(np.abs(potential.W[:, outside]), initial=0.0))
    if tail > tail_tolerance * peak:
        raise ValueError("potential has not decayed at the smallest fitting radius; enlarge the grid")
    tp = np.asarray(theta_prime, dtype=float)
    n = grid.dim
    samples = sample_along(solution.u_sc, grid, radii[:, None] * tp[None, :])
    c = green_farfield_constant(k, n)
    normalised = samples * radii ** (0.5 * (n - 1)) * np.exp(-1j * k * radii) / c
    terms = min(terms, len(radii) - 1)
    basis = np.vander(1.0 / radii, terms, increasing=True)
    coef, *_ = np.linalg.lstsq(basis, normalised, rcond=None)
    return complex(coef[0])


def radial_decay_exponent(field: np.ndarray, grid: Grid, theta_prime, radii: Sequence[float]) -> float:
    """Slope p of log|f| ~ -p log r along a ray (expected (n-1)/2 for outgoing waves)."""
    radii = np.asarray(radii, dtype=float)
    _check_radii(grid, radii)
    vals = np.abs(sample_along(field, grid, radii[:, None] * np.asarray(theta_prime, float)[None, :]))
    slope = np.polyfit(np.log(radii), np.log(vals), 1)[0]
    return float(-slope)


def sommerfeld_residual(field: np.ndarray, grid: Grid, k: float, radius: float,
                        direction_set: Optional[DirectionSet] = None) -> float:
    """r^{(n-1)/2} RMS over directions of |d f/dr - i k f| at |x| = radius.

    The radial derivative is a second-order one-sided difference outward
    along each ray.
    """
    _check_radii(grid, np.array([radius]))
    if not np.any(field):
        return 0.0
    dset = direction_set or direction_set_default(grid.dim)
    step = 0.25 * grid.spacing
    d = dset.directions
    f0 = sample_along(field, grid, radius * d)
    f1 = sample_along(field, grid, (radius + step) * d)
    f2 = sample_along(field, grid, (radius + 2 * step) * d)
    dfdr = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * step)
    resid = np.abs(dfdr - 1j * k * f0) ** 2
    rms = math.sqrt(np.sum(dset.weights * resid) / np.sum(dset.weights))
    return float(radius ** (0.5 * (grid.dim - 1)) * rms)


def direction_set_default(dim: int) -> DirectionSet:
    return direction_set(dim)
