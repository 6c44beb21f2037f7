"""
Lippmann-Schwinger solver for the scattered field of the magnetic
Schrodinger operator H = -(grad + iW)^2 + V.

    u_sc = tilde_u0 + L_k u_sc,   L_k f = G_k^+ * [ i div(W f) + i W.grad f - q_tilde f ]

The operator is applied matrix-free as a discrete convolution (see
:mod:`magscatter.kernels`).  Two solvers are provided: the Born (Neumann)
series and GMRES on (I - L_k) u_sc = tilde_u0.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .fields import DEFAULT_DELTA0, Grid, PotentialData, WeightedNormParams, weighted_norm
from .kernels import convolve

logger = logging.getLogger(__name__)

GRADIENTS = ("spectral", "central")
DIVERGENCE_PATIENCE = 5


class DivergenceError(RuntimeError):
    """The Born series stopped contracting."""

    def __init__(self, message: str, ratios: Sequence[float]):
        super().__init__(message)
        self.ratios = list(ratios)


class ConvergenceError(RuntimeError):
    """The iterative linear solve did not reach its tolerance."""

    def __init__(self, message: str, best_residual: float, iterations: int):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


@dataclass(frozen=True)
class WaveParams:
    k: float
    theta: tuple

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("wavenumber k must be positive")
        th = np.asarray(self.theta, dtype=float)
        if abs(np.linalg.norm(th) - 1.0) > 1e-12:
            raise ValueError(f"direction theta must be a unit vector, |theta| = {np.linalg.norm(th)!r}")
        object.__setattr__(self, "theta", tuple(float(t) for t in th))

    @property
    def direction(self) -> np.ndarray:
        return np.asarray(self.theta)


def unit(v) -> tuple:
    v = np.asarray(v, dtype=float)
    return tuple(v / np.linalg.norm(v))


@dataclass(frozen=True, eq=False)
class ScatteringSolution:
    grid: Grid
    u_sc: np.ndarray
    wave: WaveParams
    method: str
    iterations: int
    linear_residual: float
    tol: float
    converged: bool = True
    born_ratio_history: list = field(default_factory=list)
    norm_estimate: Optional[float] = None

    def total_field(self) -> np.ndarray:
        return incident_wave(self.grid, self.wave) + self.u_sc


def incident_wave(grid: Grid, wave: WaveParams) -> np.ndarray:
    """u_0(x) = exp(i k (x, theta))."""
    return np.exp(1j * wave.k * grid.dot(wave.direction))


# ----------------------------------------------------------------------------
# derivatives


def _spectral_divergence(vec: np.ndarray, grid: Grid) -> np.ndarray:
    # zero-padded to 2m so the implied periodisation never touches the support
    m, n = grid.points_per_axis, grid.dim
    freq = 2.0 * np.pi * np.fft.fftfreq(2 * m, d=grid.spacing)
    freq[m] = 0.0  # drop the unpaired Nyquist mode
    total = np.zeros((2 * m,) * n, dtype=complex)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = 2 * m
        total += 1j * freq.reshape(shape) * np.fft.fftn(vec[axis], s=(2 * m,) * n, axes=tuple(range(n)))
    return np.fft.ifftn(total)[(slice(0, m),) * n]


def central_gradient(f: np.ndarray, grid: Grid) -> list:
    return [np.asarray(g) for g in np.gradient(f, grid.spacing, edge_order=2)]


class LkOperator:
    """L_k for one potential and wavenumber.

    Parameters
    ----------
    kernel : {"spectral", "corrected"}
        Discrete Green's kernel (see :mod:`magscatter.kernels`).
    gradient : {"spectral", "central"}
        ``spectral`` writes i div(W f) + i W.grad f = 2i div(W f) - i (div W) f
        and differentiates the compactly supported product W f spectrally;
        ``central`` uses second-order central differences of f.
    quadrature : {"fft", "dense"}
        Zero-padded FFT convolution or direct summation.
    """

    def __init__(self, potential: PotentialData, k: float, kernel: str = "spectral",
                 gradient: str = "spectral", quadrature: str = "fft"):
        if not k > 0:
            raise ValueError("wavenumber k must be positive")
        if gradient not in GRADIENTS:
            raise ValueError(f"unknown gradient scheme {gradient!r}")
        self.potential = potential
        self.grid = potential.grid
        self.k = float(k)
        self.kernel = kernel
        self.gradient = gradient
        self.quadrature = quadrature
        self.magnetic = potential.has_magnetic
        self.zero = potential.is_zero

    def source(self, f: np.ndarray) -> np.ndarray:
        """i div(W f) + i W.grad f - q_tilde f with a numerical gradient of f."""
        pot = self.potential
        f = np.asarray(f, dtype=complex)
        if f.shape != self.grid.shape:
            raise ValueError("field does not live on the potential's grid")
        s = -pot.q_tilde * f
        if not self.magnetic:
            return s
        if self.gradient == "spectral":
            s = s + 2j * _spectral_divergence(pot.W * f, self.grid) - 1j * pot.divW * f
        else:
            grads = central_gradient(f, self.grid)
            s = s + 1j * pot.divW * f + 2j * sum(w * g for w, g in zip(pot.W, grads))
        return s

    def incident_source(self, wave: WaveParams) -> np.ndarray:
        """The source for u_0 with its exact gradient i k theta u_0."""
        pot = self.potential
        u0 = incident_wave(self.grid, wave)
        w_theta = sum(t * w for t, w in zip(wave.direction, pot.W))
        return (1j * pot.divW - 2.0 * wave.k * w_theta - pot.q_tilde) * u0

    def convolve(self, s: np.ndarray, quadrature: Optional[str] = None) -> np.ndarray:
        return convolve(s, self.grid, self.k, self.kernel, quadrature or self.quadrature)

    def __call__(self, f: np.ndarray, quadrature: Optional[str] = None) -> np.ndarray:
        if self.zero:
            return np.zeros(self.grid.shape, dtype=complex)
        return self.convolve(self.source(f), quadrature)

    def tilde_u0(self, wave: WaveParams) -> np.ndarray:
        if self.zero:
            return np.zeros(self.grid.shape, dtype=complex)
        return self.convolve(self.incident_source(wave))


def _check_grid(potential: PotentialData, grid: Optional[Grid]) -> None:
    if grid is not None and not grid.same_as(potential.grid):
        raise ValueError("grid mismatch between potential and requested grid")


def apply_Lk(potential: PotentialData, k: float, f: np.ndarray, quadrature_mode: str = "fft_convolution",
             kernel: str = "spectral", gradient: str = "spectral") -> np.ndarray:
    return LkOperator(potential, k, kernel, gradient, quadrature_mode)(f)


def tilde_u0(potential: PotentialData, wave: WaveParams, grid: Optional[Grid] = None,
             quadrature_mode: str = "fft_convolution", kernel: str = "spectral") -> np.ndarray:
    """L_k u_0 using the analytic gradient of the plane wave."""
    _check_grid(potential, grid)
    return LkOperator(potential, wave.k, kernel, quadrature=quadrature_mode).tilde_u0(wave)


# ----------------------------------------------------------------------------
# solvers


def _wnorm(f: np.ndarray, grid: Grid, delta: float) -> float:
    return weighted_norm(f, grid, WeightedNormParams(2.0, -delta))


def fixed_point_residual(op: LkOperator, u_sc: np.ndarray, rhs: np.ndarray) -> float:
    """||u_sc - tilde_u0 - L_k u_sc||_2 / ||tilde_u0||_2 (0 when tilde_u0 = 0 and u_sc = 0)."""
    r = np.linalg.norm(u_sc - rhs - op(u_sc))
    scale = np.linalg.norm(rhs)
    if scale == 0:
        return float(r)
    return float(r / scale)


def solve_born_series(potential: PotentialData, wave: WaveParams, grid: Optional[Grid] = None,
                      max_terms: int = 60, tol: float = 1e-8, delta0: float = DEFAULT_DELTA0,
                      kernel: str = "spectral", gradient: str = "spectral",
                      quadrature: str = "fft") -> ScatteringSolution:
    """Sum u_sc = sum_{j>=1} L_k^j u_0 until the last increment is below tol ||tilde_u0||.

    Raises
    ------
    DivergenceError
        After ``DIVERGENCE_PATIENCE`` consecutive non-decreasing increments.
    """
    _check_grid(potential, grid)
    grid = potential.grid
    op = LkOperator(potential, wave.k, kernel, gradient, quadrature)
    term = op.tilde_u0(wave)
    base = _wnorm(term, grid, delta0)
    u_sc = term.copy()
    if base == 0.0:
        return ScatteringSolution(grid, u_sc, wave, "born_series", 1, 0.0, tol, True, [])
    ratios: list = []
    previous = base
    rising = 0
    converged = False
    n_terms = 1
    while n_terms < max_terms:
        term = op(term)
        n_terms += 1
        size = _wnorm(term, grid, delta0)
        ratios.append(size / previous)
        u_sc += term
        if size <= tol * base:
            converged = True
            break
        rising = rising + 1 if size >= previous else 0
        if rising >= DIVERGENCE_PATIENCE:
            raise DivergenceError(
                f"Born series diverges: {rising} consecutive non-decreasing increments "
                f"(last ratio {ratios[-1]:.3g}); potential too strong", ratios)
        previous = size
    if not converged:
        logger.warning("Born series stopped at %d terms without reaching tol %.1e", n_terms, tol)
    rhs = op.tilde_u0(wave)
    residual = fixed_point_residual(op, u_sc, rhs)
    return ScatteringSolution(grid, u_sc, wave, "born_series", n_terms, residual, tol, converged, ratios)


def solve_direct(potential: PotentialData, wave: WaveParams, grid: Optional[Grid] = None,
                 tol: float = 1e-8, max_iters: int = 200, restart: int = 40,
                 kernel: str = "spectral", gradient: str = "spectral",
                 quadrature: str = "fft") -> ScatteringSolution:
    """Solve (I - L_k) u_sc = tilde_u0 with restarted GMRES (matrix-free)."""
    _check_grid(potential, grid)
    grid = potential.grid
    op = LkOperator(potential, wave.k, kernel, gradient, quadrature)
    rhs = op.tilde_u0(wave)
    if not np.any(rhs):
        return ScatteringSolution(grid, np.zeros(grid.shape, complex), wave, "direct", 0, 0.0, tol, True)

    shape = grid.shape
    A = LinearOperator((grid.size, grid.size), dtype=complex,
                       matvec=lambda v: v - op(v.reshape(shape)).ravel())
    count = [0]

    def _tick(_):
        count[0] += 1

    x, info = gmres(A, rhs.ravel(), rtol=0.5 * tol, atol=0.0, restart=restart, maxiter=max_iters,
                    callback=_tick, callback_type="pr_norm")
    u_sc = x.reshape(shape)
    residual = fixed_point_residual(op, u_sc, rhs)
    if residual > tol:
        raise ConvergenceError(f"GMRES did not converge in {count[0]} iterations "
                               f"(residual {residual:.2e} > tol {tol:.1e})", residual, count[0])
    return ScatteringSolution(grid, u_sc, wave, "direct", count[0], residual, tol, True)


def estimate_operator_norm(potential: PotentialData, k: float, delta: float = DEFAULT_DELTA0,
                           iters: int = 30, kernel: str = "spectral", gradient: str = "spectral") -> float:
    """Power-iteration estimate of the dominant modulus of L_k on L^2_{-delta}.

    The start vector is fixed (the constant field), so the result is
    deterministic.  This bounds the spectral radius from below and is a
    convergence heuristic for the Born series, not a proven operator bound.
    """
    if iters < 10:
        raise ValueError("need at least 10 power iterations")
    grid = potential.grid
    if potential.is_zero:
        return 0.0
    op = LkOperator(potential, k, kernel, gradient)
    w2 = (1.0 + grid.r2) ** (-delta)
    f = np.ones(grid.shape, dtype=complex)
    f /= math.sqrt(np.sum(w2 * np.abs(f) ** 2))
    rayleigh = 0.0
    for _ in range(iters):
        g = op(f)
        size = math.sqrt(np.sum(w2 * np.abs(g) ** 2))
        if size < 1e-300:
            return 0.0
        rayleigh = abs(np.sum(w2 * np.conj(f) * g))
        f = g / size
    return float(rayleigh)


def residual_pde(solution: ScatteringSolution, potential: PotentialData, margin: int = 2) -> float:
    """Relative interior residual of H u = k^2 u with u = u_0 + u_sc.

    Derivatives of u_sc are second-order central differences, those of u_0
    exact.  The residual (-Delta_h - k^2) u_sc - s(u) is measured against
    the size of the scattering source s(u).
    """
    grid = solution.grid
    k = solution.wave.k
    theta = solution.wave.direction
    u0 = incident_wave(grid, solution.wave)
    usc = solution.u_sc
    lap = discrete_laplacian(usc, grid)
    grads = central_gradient(usc, grid)
    u = u0 + usc
    grad_w = sum(w * (1j * k * t * u0 + g) for w, t, g in zip(potential.W, theta, grads))
    src = 1j * potential.divW * u + 2j * grad_w - potential.q_tilde * u
    res = -lap - k * k * usc - src
    inner = (slice(margin, grid.points_per_axis - margin),) * grid.dim
    scale = np.linalg.norm(src[inner])
    num = np.linalg.norm(res[inner])
    return float(num / scale) if scale > 0 else float(num)


def discrete_laplacian(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Second-order (2n+1)-point Laplacian; the outermost layer wraps and must be discarded."""
    lap = -2.0 * grid.dim * f
    for axis in range(grid.dim):
        lap = lap + np.roll(f, 1, axis) + np.roll(f, -1, axis)
    return lap / grid.spacing**2


def green_identity_error(source: np.ndarray, grid: Grid, k: float, kernel: str = "spectral",
                         margin: int = 2) -> float:
    """Relative interior L^2 error of (-Delta_h - k^2)(G_k^+ * f) against f."""
    f = np.asarray(source, dtype=complex)
    u = convolve(f, grid, k, kernel)
    res = -discrete_laplacian(u, grid) - k * k * u - f
    inner = (slice(margin, grid.points_per_axis - margin),) * grid.dim
    scale = np.linalg.norm(f[inner])
    if scale == 0:
        return float(np.linalg.norm(res[inner]))
    return float(np.linalg.norm(res[inner]) / scale)


@dataclass(frozen=True)
class AgmonRow:
    k: float
    ratio: float
    scaled: float  # k * ratio


def verify_agmon_decay(grid: Grid, delta: float, k_list: Sequence[float], probe_source: np.ndarray,
                       kernel: str = "spectral") -> list:
    """k ||G_k^+ * f||_{L^2_{-delta}} / ||f||_{L^2_delta} for each k (bounded in k for delta > 1/2)."""
    f = np.asarray(probe_source)
    if delta <= 0.5:
        warnings.warn("delta <= 1/2: the weighted resolvent bound does not apply; ratios may grow "
                      "with the box size", stacklevel=2)
    rows = []
    den = weighted_norm(f, grid, WeightedNormParams(2.0, delta))
    for k in k_list:
        if k < 1:
            raise ValueError("the uniform resolvent bound is stated for k >= 1")
        if den == 0.0:
            rows.append(AgmonRow(float(k), 0.0, 0.0))
            continue
        u = convolve(f.astype(complex), grid, k, kernel)
        ratio = weighted_norm(u, grid, WeightedNormParams(2.0, -delta)) / den
        rows.append(AgmonRow(float(k), ratio, k * ratio))
    return rows
