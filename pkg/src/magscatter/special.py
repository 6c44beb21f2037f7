"""
Bessel/Hankel functions of orders 0, 1/2, 1 for positive real argument and
the outgoing Helmholtz Green's kernel in two and three dimensions.

Orders 0 and 1 use the ascending power/log series below ``SWITCH`` and the
Hankel large-argument expansion above it.  Order 1/2 is elementary.

    G_k^+(r) = (i/4) (k / 2 pi r)^{(n-2)/2} H^{(1)}_{(n-2)/2}(k r)

which reduces to e^{ikr}/(4 pi r) for n = 3 and (i/4) H^{(1)}_0(kr) for n = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SWITCH = 12.0
SERIES_TERMS = 25
ASYMPTOTIC_TERMS = 30
EULER_GAMMA = 0.57721566490153286061

_REGIMES = ("series", "closed_form", "asymptotic")


@dataclass(frozen=True)
class GreenEval:
    """Value of G_k^+ together with the branch that produced it."""

    value: complex
    regime: str
    estimated_abs_error: float


def _as_positive(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z)) or np.any(z <= 0.0):
        raise ValueError("Bessel/Hankel argument must be finite and > 0 (branch point at 0)")
    return z


def _series(order: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # J_nu and Y_nu, nu in {0, 1}, by the ascending series (A&S 9.1.10-9.1.11).
    x = 0.25 * z * z
    half = 0.5 * z
    log_term = (2.0 / math.pi) * np.log(half)
    J = np.zeros_like(z)
    S = np.zeros_like(z)
    if order == 0:
        term = np.ones_like(z)
        harmonic = 0.0
        for k in range(SERIES_TERMS):
            if k > 0:
                term = term * (-x) / (k * k)
                harmonic += 1.0 / k
            J = J + term
            # Y0 = (2/pi)(ln(z/2) + gamma) J0 + (2/pi) sum_{k>=1} (-1)^{k+1} H_k (z^2/4)^k/(k!)^2
            S = S - term * harmonic
        Y = (log_term + 2.0 * EULER_GAMMA / math.pi) * J + (2.0 / math.pi) * S
        return J, Y
    term = half.copy()
    psi_sum = -2.0 * EULER_GAMMA + 1.0  # psi(1) + psi(2)
    for k in range(SERIES_TERMS):
        if k > 0:
            term = term * (-x) / (k * (k + 1))
            psi_sum += 1.0 / k + 1.0 / (k + 1)
        J = J + term
        S = S + term * psi_sum
    Y = log_term * J - 2.0 / (math.pi * z) - S / math.pi
    return J, Y


def _asymptotic(order: float, z: np.ndarray) -> np.ndarray:
    # H^{(1)}_nu(z) ~ sqrt(2/(pi z)) e^{i(z - nu pi/2 - pi/4)} sum_k i^k a_k(nu) / z^k
    mu = 4.0 * order * order
    total = np.ones_like(z, dtype=complex)
    term = np.ones_like(z, dtype=complex)
    best = np.full(z.shape, np.inf)
    done = np.zeros(z.shape, dtype=bool)
    for k in range(1, ASYMPTOTIC_TERMS + 1):
        step = 1j * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        term = term * step
        size = np.abs(term)
        # stop each lane before the divergent tail
        done |= size > best
        best = np.where(done, best, size)
        total = total + np.where(done, 0.0, term)
    phase = z - 0.5 * order * math.pi - 0.25 * math.pi
    return np.sqrt(2.0 / (math.pi * z)) * np.exp(1j * phase) * total


def bessel_jy(order: int, z) -> tuple[np.ndarray, np.ndarray]:
    """Return (J_order(z), Y_order(z)) for order 0 or 1 and z > 0."""
    if order not in (0, 1):
        raise ValueError("bessel_jy supports orders 0 and 1 only")
    z = _as_positive(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    J = np.empty_like(z)
    Y = np.empty_like(z)
    small = z <= SWITCH
    if np.any(small):
        J[small], Y[small] = _series(order, z[small])
    if np.any(~small):
        h = _asymptotic(order, z[~small])
        J[~small], Y[~small] = h.real, h.imag
    if scalar:
        return J[0], Y[0]
    return J, Y


def hankel1(order: float, z):
    """Hankel function of the first kind H^{(1)}_order(z) for order in {0, 0.5, 1}."""
    if order == 0.5:
        z = _as_positive(z)
        return -1j * np.sqrt(2.0 / (math.pi * z)) * np.exp(1j * z)
    if order not in (0, 1):
        raise ValueError("hankel1 supports orders 0, 0.5 and 1")
    J, Y = bessel_jy(int(order), z)
    return J + 1j * Y


def hankel1_regime(order: float, z: float) -> str:
    if order == 0.5:
        return "closed_form"
    return "series" if z <= SWITCH else "asymptotic"


def _check_dim(dim: int) -> None:
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")


def green_values(k: float, r, dim: int) -> np.ndarray:
    """Vectorised G_k^+(r); every r must be > 0."""
    _check_dim(dim)
    if k <= 0:
        raise ValueError("wavenumber k must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("G_k^+ is singular at r = 0")
    if dim == 3:
        return np.exp(1j * k * r) / (4.0 * math.pi * r)
    return 0.25j * hankel1(0, k * r)


def green_hankel_form(k: float, r, dim: int) -> np.ndarray:
    """G_k^+ through the general Hankel-order (n-2)/2 formula (used as a cross-check)."""
    _check_dim(dim)
    r = np.asarray(r, dtype=float)
    nu = 0.5 * (dim - 2)
    return 0.25j * (k / (2.0 * math.pi * r)) ** nu * hankel1(nu, k * r)


def green(k: float, r: float, dim: int) -> GreenEval:
    """Outgoing Green's kernel of -Delta - k^2 at distance ``r``.

    Raises
    ------
    ValueError
        If ``r`` is zero (the singular point is handled only by the
        self-cell weight of the discretised operator) or ``k <= 0``.
    """
    if r <= 0:
        raise ValueError("G_k^+ is singular at r = 0")
    value = complex(green_values(k, r, dim))
    if dim == 3:
        regime = "closed_form"
    else:
        regime = hankel1_regime(0, k * r)
    err = 2.2e-16 * 64 * max(1.0, abs(value))
    if regime == "series":
        # the series loses digits to cancellation near the switch point
        err *= math.exp(min(k * r, SWITCH)) / 10.0
    return GreenEval(value=value, regime=regime, estimated_abs_error=err)


def green_farfield_constant(k: float, dim: int) -> complex:
    """Coefficient c_n k^{(n-3)/2} of e^{ik|x|}/|x|^{(n-1)/2} in the far field of G_k^+."""
    _check_dim(dim)
    if k <= 0:
        raise ValueError("wavenumber k must be positive")
    if dim == 3:
        return complex(1.0 / (4.0 * math.pi))
    return complex(np.exp(0.25j * math.pi) / math.sqrt(8.0 * math.pi * k))
