"""
Born approximations of the scattering amplitude and first-order inversion.

Fourier convention: F(f)(xi) = int f(x) exp(+i (x, xi)) dx.

First order::

    A_B(k, theta', theta) = -k (theta + theta').F(W)(k(theta - theta')) - F(q_tilde)(k(theta - theta'))

Second order (backscattering, theta' = -theta), with d = div W and
w = (theta, W)::

    I = c (2 pi)^{-n} int F(a)(k theta - eta) F(b)(k theta + eta) / (|eta|^2 - k^2 - i0) d eta

    I1: c = 1,       (a, b) = (d, d)
    I2: c = 4ik,     (a, b) = (d, w)
    I3: c = -4k^2,   (a, b) = (w, w)
    I4: c = 1,       (a, b) = (q_tilde, q_tilde)

The -i0 limit is split into a principal value and i pi delta(|eta|^2 - k^2).
The same terms are also available as double spatial integrals
int int e^{ik(theta, y + z)} G_k^+(|y - z|) a(y) b(z) dy dz (small grids).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .farfield import AmplitudeRecord, DirectionSet, circle_directions, direction_set
from .fields import Grid, PotentialData
from .kernels import convolve
from .transforms import lattice_frequencies, lattice_transform, nudft

TERMS = ("I1", "I2", "I3", "I4")
ORACLE_BUDGET = {3: 16, 2: 48}


@dataclass(frozen=True, eq=False)
class FourierSamples:
    frequencies: np.ndarray
    values: np.ndarray
    convention_sign: int = +1


def fourier(field, grid: Grid, frequencies=None) -> FourierSamples:
    """F(f) at arbitrary frequencies; ``None`` returns the FFT reciprocal lattice."""
    if frequencies is None:
        return FourierSamples(lattice_frequencies(grid), lattice_transform(field, grid))
    xi = np.atleast_2d(np.asarray(frequencies, dtype=float))
    return FourierSamples(xi, nudft(field, grid, xi))


def born_amplitude(potential: PotentialData, k: float, theta, theta_prime) -> complex:
    grid = potential.grid
    theta = np.asarray(theta, dtype=float)
    theta_prime = np.asarray(theta_prime, dtype=float)
    xi = (k * (theta - theta_prime))[None, :]
    value = -nudft(potential.q_tilde, grid, xi)[0]
    if potential.has_magnetic:
        s = theta + theta_prime
        for axis in range(grid.dim):
            if s[axis] != 0.0:
                value -= k * s[axis] * nudft(potential.W[axis], grid, xi)[0]
    return complex(value)


def born_linear_term(potential: PotentialData, k: float, theta, theta_prime) -> complex:
    """The W-linear part -k (theta + theta').F(W)(k(theta - theta')) on its own."""
    grid = potential.grid
    theta = np.asarray(theta, dtype=float)
    theta_prime = np.asarray(theta_prime, dtype=float)
    xi = (k * (theta - theta_prime))[None, :]
    s = theta + theta_prime
    return complex(-k * sum(s[a] * nudft(potential.W[a], grid, xi)[0] for a in range(grid.dim)))


def backscatter_born(potential: PotentialData, k: float, theta) -> complex:
    """-F(q_tilde)(2k theta); the W-linear term vanishes identically at theta' = -theta."""
    theta = np.asarray(theta, dtype=float)
    return born_amplitude(potential, k, theta, -theta)


# ----------------------------------------------------------------------------
# second order, Fourier route


@dataclass(frozen=True)
class SecondOrderTerms:
    I1: complex
    I2: complex
    I3: complex
    I4: complex
    regularization_eps: float = 0.0
    pv_shell_gap: float = 0.0

    @property
    def total(self) -> complex:
        return self.I1 + self.I2 + self.I3 + self.I4

    def as_dict(self) -> dict:
        return {"I1": self.I1, "I2": self.I2, "I3": self.I3, "I4": self.I4}

    def scaled(self, factor: complex) -> "SecondOrderTerms":
        return SecondOrderTerms(self.I1 * factor, self.I2 * factor, self.I3 * factor, self.I4 * factor,
                                self.regularization_eps, self.pv_shell_gap)


def _coefficients(k: float) -> dict:
    return {"I1": 1.0, "I2": 4j * k, "I3": -4.0 * k * k, "I4": 1.0}


class _Numerators:
    """F(a)(k theta - eta) F(b)(k theta + eta) for the four term pairs."""

    def __init__(self, potential: PotentialData, k: float, theta: np.ndarray):
        self.potential = potential
        self.grid = potential.grid
        self.k = k
        self.theta = theta
        self.magnetic = potential.has_magnetic

    def transforms(self, xi: np.ndarray) -> dict:
        out = {"q": nudft(self.potential.q_tilde, self.grid, xi)}
        if self.magnetic:
            FW = np.stack([nudft(self.potential.W[a], self.grid, xi) for a in range(self.grid.dim)])
            # F(div W)(xi) = -i xi.F(W)(xi) under the e^{+i x.xi} convention
            out["d"] = -1j * np.sum(xi.T * FW, axis=0)
            out["w"] = np.tensordot(self.theta, FW, axes=1)
        return out

    def __call__(self, eta: np.ndarray) -> dict:
        kt = self.k * self.theta
        minus = self.transforms(kt[None, :] - eta)
        plus = self.transforms(kt[None, :] + eta)
        zero = np.zeros(len(eta), dtype=complex)
        if not self.magnetic:
            return {"I1": zero, "I2": zero, "I3": zero, "I4": minus["q"] * plus["q"]}
        return {
            "I1": minus["d"] * plus["d"],
            "I2": minus["d"] * plus["w"],
            "I3": minus["w"] * plus["w"],
            "I4": minus["q"] * plus["q"],
        }


def _angular_set(dim: int, angular_order: int) -> DirectionSet:
    if dim == 2:
        return circle_directions(4 * angular_order, offset=math.pi / (4 * angular_order))
    return direction_set(3, angular_order)


def _panels(a: float, b: float, width: float, nodes: int):
    if b <= a:
        return np.empty(0), np.empty(0)
    count = max(1, int(math.ceil((b - a) / width)))
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, count + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _shell_means(numer: _Numerators, radii: np.ndarray, dirs: DirectionSet) -> dict:
    """Angular integrals M(rho) = int_S N(rho omega) d omega for each term."""
    d = dirs.directions
    eta = (radii[:, None, None] * d[None, :, :]).reshape(-1, d.shape[1])
    vals = numer(eta)
    return {key: (v.reshape(len(radii), len(d)) @ dirs.weights) for key, v in vals.items()}


def second_order_fourier(potential: PotentialData, k: float, theta, pv_shell_gap: Optional[float] = None,
                         angular_order: int = 8, radial_nodes: int = 16, tail_tol: float = 1e-7,
                         regularization_eps: float = 0.0) -> SecondOrderTerms:
    """I_1 ... I_4 by frequency-domain quadrature.

    The radial principal value is taken with singularity subtraction outside
    the window |rho - k| < pv_shell_gap and with node pairs symmetric about
    rho = k inside it; the shell term is i pi k^{n-2}/2 times the angular
    integral at rho = k.  ``regularization_eps > 0`` replaces this by the
    damped kernel 1/(rho^2 - k^2 - i eps) (diagnostic only).

    Raises
    ------
    ValueError
        If ``pv_shell_gap >= k/4`` or the numerators have not decayed to 1% of
        their peak by the grid's Nyquist radius.
    """
    grid = potential.grid
    n = grid.dim
    theta = np.asarray(theta, dtype=float)
    gap = k / 8.0 if pv_shell_gap is None else float(pv_shell_gap)
    if not 0 < gap < k / 4.0:
        raise ValueError("pv_shell_gap must lie in (0, k/4)")
    if potential.is_zero:
        return SecondOrderTerms(0j, 0j, 0j, 0j, regularization_eps, gap)
    numer = _Numerators(potential, k, theta)
    dirs = _angular_set(n, angular_order)

    # truncation radius: |k theta +- eta| must stay below the Nyquist frequency
    cap = math.pi / grid.spacing - k
    if cap <= k + gap:
        raise ValueError("grid too coarse: Nyquist radius does not clear the k-shell")
    probe = np.linspace(0.0, cap, 65)
    coarse = _angular_set(n, 4)
    size = np.max(np.abs(np.stack(list(_shell_means(numer, probe, coarse).values()))), axis=0)
    size = size * np.maximum(probe, 1e-300) ** (n - 1)
    peak = size.max()
    if size[-1] > 1e-2 * peak:
        raise ValueError("numerator transforms still above 1% of peak at the Nyquist radius; "
                         "use a finer grid or a larger eta-domain")
    above = np.nonzero(size > tail_tol * peak)[0]
    rho_max = probe[min(above[-1] + 1, len(probe) - 1)] if len(above) else 2.0 * k
    rho_max = max(rho_max, 2.0 * k)

    coef = _coefficients(k)
    norm = (2.0 * math.pi) ** (-n)

    if regularization_eps > 0:
        rho, wr = _panels(0.0, rho_max, 0.05 * k, radial_nodes)
        M = _shell_means(numer, rho, dirs)
        kernel = rho ** (n - 1) / (rho * rho - k * k - 1j * regularization_eps)
        vals = {key: coef[key] * norm * np.sum(wr * kernel * M[key]) for key in TERMS}
        return SecondOrderTerms(**vals, regularization_eps=regularization_eps, pv_shell_gap=gap)

    panel = 0.5
    lo_r, lo_w = _panels(0.0, k - gap, panel, radial_nodes)
    hi_r, hi_w = _panels(k + gap, rho_max, panel, radial_nodes)
    t, tw = np.polynomial.legendre.leggauss(radial_nodes)
    t = 0.5 * gap * (t + 1.0)
    tw = 0.5 * gap * tw
    radii = np.concatenate([lo_r, hi_r, k + t, k - t, [k]])
    M = _shell_means(numer, radii, dirs)
    n_lo, n_hi, n_t = len(lo_r), len(hi_r), len(t)

    def h(rho, m):
        return rho ** (n - 1) / (rho + k) * m

    out = {}
    for key in TERMS:
        m = M[key]
        m_out = m[: n_lo + n_hi]
        m_plus = m[n_lo + n_hi: n_lo + n_hi + n_t]
        m_minus = m[n_lo + n_hi + n_t: -1]
        m_k = m[-1]
        hk = h(k, m_k)
        r_out = np.concatenate([lo_r, hi_r])
        w_out = np.concatenate([lo_w, hi_w])
        pv = np.sum(w_out * (h(r_out, m_out) - hk) / (r_out - k))
        pv += hk * math.log((rho_max - k) / k)
        pv += np.sum(tw * (h(k + t, m_plus) - h(k - t, m_minus)) / t)
        shell = 0.5j * math.pi * k ** (n - 2) * m_k
        out[key] = complex(coef[key] * norm * (pv + shell))
    return SecondOrderTerms(**out, regularization_eps=0.0, pv_shell_gap=gap)


# ----------------------------------------------------------------------------
# second order, spatial oracle


def second_order_spatial(potential: PotentialData, k: float, theta, kernel: str = "spectral") -> SecondOrderTerms:
    """Double spatial integrals by dense quadrature with the solver's kernel table."""
    grid = potential.grid
    if grid.points_per_axis > ORACLE_BUDGET[grid.dim]:
        raise ValueError(f"spatial oracle limited to m <= {ORACLE_BUDGET[grid.dim]} in {grid.dim}D")
    theta = np.asarray(theta, dtype=float)
    phase = np.exp(1j * k * grid.dot(theta))
    h_n = grid.cell_volume
    fields = {"q": potential.q_tilde}
    if potential.has_magnetic:
        fields["d"] = potential.divW
        fields["w"] = sum(t * w for t, w in zip(theta, potential.W))
    conv = {key: convolve(f * phase, grid, k, kernel, "dense") for key, f in fields.items()}

    def pair(a, b):
        return complex(np.sum(fields[a] * phase * conv[b]) * h_n)

    coef = _coefficients(k)
    if not potential.has_magnetic:
        return SecondOrderTerms(0j, 0j, 0j, coef["I4"] * pair("q", "q"))
    return SecondOrderTerms(coef["I1"] * pair("d", "d"), coef["I2"] * pair("d", "w"),
                            coef["I3"] * pair("w", "w"), coef["I4"] * pair("q", "q"))


# ----------------------------------------------------------------------------


def remainder_bound(c0: float, c1: float) -> float:
    """c0 c1 / (1 - c1): bound on the weighted norm of sum_{j>=2} L_k^j u_0."""
    if c0 < 0 or c1 < 0:
        raise ValueError("constants must be non-negative")
    if c1 >= 1:
        raise ValueError("c1 >= 1: the Born series is not controlled")
    return c0 * c1 / (1.0 - c1)


def improved_backscatter(potential: PotentialData, k: float, theta, **kwargs) -> complex:
    """-F(|W|^2 + V)(2k theta) + I1 + I2 + I3 + I4."""
    terms = second_order_fourier(potential, k, theta, **kwargs)
    return backscatter_born(potential, k, theta) + terms.total


# ----------------------------------------------------------------------------
# inversion


def _ring_weights_2d(angles: np.ndarray) -> np.ndarray:
    order = np.argsort(angles)
    a = angles[order]
    gaps = np.diff(np.concatenate([a, [a[0] + 2 * math.pi]]))
    w_sorted = 0.5 * (gaps + np.roll(gaps, 1))
    w = np.empty_like(w_sorted)
    w[order] = w_sorted
    return w


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.zeros_like(x)
    if len(x) > 1:
        d = np.diff(x)
        w[:-1] += 0.5 * d
        w[1:] += 0.5 * d
    return w


def invert_backscatter(records: Sequence[AmplitudeRecord], output_grid: Grid,
                       direction_weights: Optional[np.ndarray] = None, taper_fraction: float = 0.2,
                       gap_factor: float = 1.5) -> np.ndarray:
    """Band-limited reconstruction of q_tilde from backscattering amplitudes.

    Records must form a product set (wavenumbers x directions over a
    hemisphere).  F(q_tilde)(2k theta) ~ -A(k, -theta, theta) is extended to
    the opposite hemisphere by Hermitian symmetry, the disc inside the
    smallest sampled |xi| is filled with a quadratic least-squares
    extrapolation from the two innermost rings, and the inverse transform
    is evaluated by polar quadrature with a raised-cosine taper over the outer
    ``taper_fraction`` of the radial band.

    In 3D ``direction_weights`` (hemisphere quadrature weights summing to
    2 pi) must be supplied; in 2D they are derived from the angular spacing.
    """
    n = output_grid.dim
    if not records:
        return np.zeros(output_grid.shape)
    ks = np.array([r.k for r in records])
    th = np.array([r.theta for r in records], dtype=float)
    for r in records:
        if not np.allclose(r.theta_prime, -np.asarray(r.theta), atol=1e-12):
            raise ValueError("inversion needs backscattering records (theta' = -theta)")
    if th.shape[1] != n:
        raise ValueError("record dimension does not match output grid")
    k_vals = np.unique(ks)
    d_keys, d_index = np.unique(np.round(th, 12), axis=0, return_inverse=True)
    d_index = np.ravel(d_index)
    table = np.full((len(k_vals), len(d_keys)), np.nan + 0j)
    k_index = np.searchsorted(k_vals, ks)
    for ki, di, rec in zip(k_index, d_index, records):
        table[ki, di] = -rec.value
    if np.any(np.isnan(table)):
        raise ValueError("records do not form a complete (k x direction) product set")
    dirs = d_keys / np.linalg.norm(d_keys, axis=1, keepdims=True)

    # Hermitian fill: F(-xi) = conj F(xi)
    all_dirs = np.concatenate([dirs, -dirs])
    data = np.concatenate([table, np.conj(table)], axis=1)
    if n == 2:
        ang = np.arctan2(all_dirs[:, 1], all_dirs[:, 0])
        w_dir = _ring_weights_2d(ang)
        max_arc = float(np.max(w_dir))
    else:
        if direction_weights is None:
            raise ValueError("3D inversion requires hemisphere quadrature weights")
        wd = np.asarray(direction_weights, dtype=float)
        w_dir = np.concatenate([wd, wd])
        max_arc = float(math.sqrt(np.max(wd)))
    rho = 2.0 * k_vals
    rho_max = rho.max()

    nyquist = math.pi / output_grid.half_width
    radial_gaps = np.diff(rho) if len(rho) > 1 else np.array([rho_max])
    worst = max(float(np.max(radial_gaps)), rho_max * max_arc)
    if worst > gap_factor * nyquist:
        raise ValueError(f"frequency coverage gap {worst:.3g} exceeds {gap_factor} x the Nyquist spacing "
                         f"{nyquist:.3g} of the output grid")

    # low-frequency disc: quadratic polynomial in xi fitted on the two innermost rings
    inner = rho[: min(2, len(rho))]
    xs = np.concatenate([r * all_dirs for r in inner])
    ys = np.concatenate([data[i] for i in range(len(inner))])

    def design(x):
        cols = [np.ones(len(x))] + [x[:, a] for a in range(n)]
        cols += [x[:, a] * x[:, b] for a in range(n) for b in range(a, n)]
        return np.stack(cols, axis=1)

    coef, *_ = np.linalg.lstsq(design(xs), ys, rcond=None)
    disc_r, disc_w = np.polynomial.legendre.leggauss(8)
    disc_r = 0.5 * rho[0] * (disc_r + 1.0)
    disc_w = 0.5 * rho[0] * disc_w

    nodes = []
    weights = []
    values = []
    for r, w in zip(disc_r, disc_w):
        pts = r * all_dirs
        nodes.append(pts)
        weights.append(w * r ** (n - 1) * w_dir)
        values.append(design(pts) @ coef)
    wr = _trapezoid_weights(rho)
    for i, r in enumerate(rho):
        nodes.append(r * all_dirs)
        weights.append(wr[i] * r ** (n - 1) * w_dir)
        values.append(data[i])
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    values = np.concatenate(values)

    radius = np.linalg.norm(nodes, axis=1)
    start = (1.0 - taper_fraction) * rho_max
    taper = np.where(radius <= start, 1.0,
                     0.5 * (1.0 + np.cos(math.pi * np.clip((radius - start) / (rho_max - start), 0, 1))))
    coeffs = weights * taper * values * (2.0 * math.pi) ** (-n)

    # q(x) = sum_j c_j exp(-i x.xi_j), evaluated axis by axis
    pts = output_grid.points()
    out = np.empty(len(pts), dtype=complex)
    block = 4096
    for s in range(0, len(pts), block):
        out[s:s + block] = np.exp(-1j * pts[s:s + block] @ nodes.T) @ coeffs
    return out.real.reshape(output_grid.shape)


def backscatter_records(amplitude_fn, k_values: Sequence[float], directions: np.ndarray,
                        method: str = "born_first_order") -> list:
    """Tabulate ``amplitude_fn(k, theta)`` over a product set of backscattering data."""
    out = []
    for k in k_values:
        for d in directions:
            th = tuple(np.asarray(d, dtype=float))
            out.append(AmplitudeRecord(float(k), th, tuple(-np.asarray(th)), complex(amplitude_fn(k, th)), method))
    return out


def hemisphere_directions(dim: int, count: int) -> np.ndarray:
    """``count`` directions spread over the upper half circle (2D), angles in [0, pi)."""
    if dim != 2:
        raise ValueError("only the 2D half circle is tabulated here")
    phi = math.pi * (np.arange(count) + 0.5) / count
    return np.stack([np.cos(phi), np.sin(phi)], axis=1)
