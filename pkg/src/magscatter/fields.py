"""
Grids, parametric potential families and weighted norms.

All potentials are sampled analytically at cell centres of a cubic box
[-L, L]^n.  The magnetic field W is stored with its analytic divergence;
the effective scalar potential is q_tilde = |W|^2 + V.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

FAMILIES = ("gaussian_bump", "smooth_compact_bump", "power_tail", "pure_gauge")
DEFAULT_DELTA0 = 1.0
TAIL_TOLERANCE = 1e-6
# any exponent above 2 is admissible for families with super-polynomial decay
NOMINAL_MU = 3.0


@dataclass(frozen=True)
class Grid:
    """Cell-centred uniform grid on [-half_width, half_width]^dim."""

    dim: int
    half_width: float
    points_per_axis: int

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        h = self.spacing
        return -self.half_width + h * (np.arange(self.points_per_axis) + 0.5)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing="ij", sparse=True))

    @cached_property
    def r2(self) -> np.ndarray:
        return sum(c * c for c in self.coords) + np.zeros(self.shape)

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(self.r2)

    def points(self) -> np.ndarray:
        """All grid points as an (N, dim) array in C order."""
        full = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack([c.ravel() for c in full], axis=1)

    def dot(self, direction) -> np.ndarray:
        """(x, direction) sampled on the grid."""
        direction = np.asarray(direction, dtype=float)
        return sum(c * d for c, d in zip(self.coords, direction)) + np.zeros(self.shape)

    def same_as(self, other: "Grid") -> bool:
        return (self.dim, self.points_per_axis) == (other.dim, other.points_per_axis) and math.isclose(
            self.half_width, other.half_width
        )


def make_grid(dim: int, half_width: float, points_per_axis: int) -> Grid:
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if not half_width > 0:
        raise ValueError("half_width must be positive")
    m = int(points_per_axis)
    if m != points_per_axis or m % 2:
        raise ValueError(f"points_per_axis must be an even integer, got {points_per_axis}")
    if m < 8:
        raise ValueError("points_per_axis must be at least 8")
    return Grid(dim, float(half_width), m)


@dataclass(frozen=True)
class PotentialSpec:
    """One parametric scalar profile, or a gauge generator wrapper.

    ``gaussian_bump``        A exp(-|x-c|^2 / width^2)
    ``smooth_compact_bump``  A exp(1 - 1/(1 - |x-c|^2/width^2)), support radius ``width``
    ``power_tail``           A (1 + |x-c|^2/width^2)^(-mu/2)
    ``pure_gauge``           W = grad(phi) with phi given by ``generator``
    """

    family: str
    amplitude: float = 1.0
    width: float = 1.0
    center: Optional[tuple] = None
    mu: Optional[float] = None
    generator: Optional["PotentialSpec"] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.family == "pure_gauge":
            if self.generator is None or self.generator.family == "pure_gauge":
                raise ValueError("pure_gauge needs a scalar generator spec")
            return
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.family == "power_tail":
            if self.mu is None:
                raise ValueError("power_tail needs a decay exponent mu")
            if self.mu <= 0:
                raise ValueError("power_tail exponent must be positive")

    def scaled(self, alpha: float) -> "PotentialSpec":
        if self.family == "pure_gauge":
            return PotentialSpec("pure_gauge", generator=self.generator.scaled(alpha))
        return PotentialSpec(self.family, self.amplitude * alpha, self.width, self.center, self.mu)

    def center_in(self, dim: int) -> np.ndarray:
        if self.center is None:
            return np.zeros(dim)
        c = np.asarray(self.center, dtype=float)
        if c.shape != (dim,):
            raise ValueError(f"center {self.center} does not match dimension {dim}")
        return c


@dataclass(frozen=True)
class VectorSpec:
    """Magnetic potential: optional per-axis bumps plus an optional gauge part grad(phi)."""

    components: tuple = ()
    gauge: Optional[PotentialSpec] = None

    def scaled(self, alpha: float) -> "VectorSpec":
        comps = tuple(None if c is None else c.scaled(alpha) for c in self.components)
        gauge = None if self.gauge is None else self.gauge.scaled(alpha)
        return VectorSpec(comps, gauge)


ScalarLike = Union[None, PotentialSpec, Sequence[PotentialSpec]]
VectorLike = Union[None, PotentialSpec, VectorSpec]


@dataclass(frozen=True, eq=False)
class PotentialData:
    grid: Grid
    V: np.ndarray
    W: np.ndarray  # shape (dim, *grid.shape)
    divW: np.ndarray
    mu: float
    c_decay: float
    specs: tuple = field(default=(), compare=False, repr=False)

    @cached_property
    def q_tilde(self) -> np.ndarray:
        return np.sum(self.W * self.W, axis=0) + self.V

    @property
    def has_magnetic(self) -> bool:
        return bool(np.any(self.W != 0.0))

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.V) or np.any(self.W) or np.any(self.divW))

    def scaled(self, alpha: float) -> "PotentialData":
        """(V, W) -> (alpha V, alpha W); q_tilde is recomputed from the scaled fields."""
        return PotentialData(self.grid, alpha * self.V, alpha * self.W, alpha * self.divW, self.mu,
                             abs(alpha) * self.c_decay, self.specs)


@dataclass(frozen=True)
class WeightedNormParams:
    p: float = 2.0
    delta: float = DEFAULT_DELTA0


# ----------------------------------------------------------------------------
# radial profiles: value g(r), g'(r) and the Laplacian in dim dimensions


def _profile(spec: PotentialSpec, r: np.ndarray, dim: int):
    A, s = spec.amplitude, spec.width
    t = (r / s) ** 2
    if spec.family == "gaussian_bump":
        g = A * np.exp(-t)
        dg = -2.0 * r / s**2 * g
        lap = g * (4.0 * t - 2.0 * dim) / s**2
        return g, dg, lap
    if spec.family == "power_tail":
        mu = spec.mu
        base = 1.0 + t
        g = A * base ** (-0.5 * mu)
        dg = -mu * A * base ** (-0.5 * mu - 1.0) * r / s**2
        # Delta f = f''(s)|grad s|^2 + f'(s) Delta s,  s = 1 + r^2/w^2
        lap = A * (0.5 * mu * (0.5 * mu + 1.0) * base ** (-0.5 * mu - 2.0) * 4.0 * t / s**2
                   - 0.5 * mu * base ** (-0.5 * mu - 1.0) * 2.0 * dim / s**2)
        return g, dg, lap
    if spec.family == "smooth_compact_bump":
        inside = t < 1.0
        ti = np.where(inside, t, 0.0)
        one = 1.0 - ti
        gg = np.where(inside, np.exp(1.0 - 1.0 / one), 0.0)
        d1 = -gg / one**2  # d/dt
        d2 = gg * (2.0 * ti - 1.0) / one**4
        g = A * gg
        dg = A * d1 * 2.0 * r / s**2
        lap = A * (d2 * 4.0 * ti / s**2 + d1 * 2.0 * dim / s**2)
        return g, np.where(inside, dg, 0.0), np.where(inside, lap, 0.0)
    raise ValueError(f"{spec.family} has no scalar profile")


def _sample_scalar(spec: PotentialSpec, grid: Grid):
    """Return (f, grad f, Laplacian f) sampled at the grid points."""
    c = spec.center_in(grid.dim)
    rel = [x - ci for x, ci in zip(grid.coords, c)]
    r = np.sqrt(sum(d * d for d in rel) + np.zeros(grid.shape))
    if spec.family == "smooth_compact_bump":
        reach = spec.width + float(np.max(np.abs(c)))
        if reach >= grid.half_width:
            raise ValueError("compact bump support must lie inside the grid box")
    g, dg, lap = _profile(spec, r, grid.dim)
    with np.errstate(invalid="ignore", divide="ignore"):
        radial = np.where(r > 0, dg / r, 0.0)
    grad = np.stack([radial * d for d in rel])
    return g, grad, lap


def _decay_constant(spec: PotentialSpec, mu: float, dim: int) -> float:
    # sup over |x| of profile(|x - c|) * |x|^mu, using |x| <= |x - c| + |c|
    shift = float(np.linalg.norm(spec.center_in(dim)))
    r = np.concatenate([np.linspace(0.0, 10.0 * spec.width, 2001)[1:], np.geomspace(10.0 * spec.width, 1e4 * spec.width, 2000)])
    g, dg, lap = _profile(spec, r, dim)
    env = np.max(np.abs(np.stack([g, dg, lap])), axis=0)
    return float(np.max(env * (r + shift) ** mu))


def _as_list(spec: ScalarLike) -> list:
    if spec is None:
        return []
    if isinstance(spec, PotentialSpec):
        return [spec]
    return [s for s in spec if s is not None]


def _as_vector(spec: VectorLike, dim: int) -> VectorSpec:
    if spec is None:
        return VectorSpec()
    if isinstance(spec, PotentialSpec):
        if spec.family != "pure_gauge":
            raise ValueError("a single scalar spec for W must be pure_gauge; use VectorSpec for components")
        return VectorSpec(gauge=spec.generator)
    if len(spec.components) not in (0, dim):
        raise ValueError(f"W needs {dim} component specs, got {len(spec.components)}")
    return spec


def sample_potential(spec_V: ScalarLike, spec_W: VectorLike, grid: Grid,
                     tail_tolerance: float = TAIL_TOLERANCE) -> PotentialData:
    """Sample V, W, div W and q_tilde analytically on ``grid``.

    ``spec_V`` may be None, one spec or a list of specs (summed).  ``spec_W``
    may be None, a ``pure_gauge`` spec, or a :class:`VectorSpec`.
    """
    v_specs = _as_list(spec_V)
    for s in v_specs:
        if s.family == "pure_gauge":
            raise ValueError("pure_gauge applies to the magnetic potential W only, not to V")
    w = _as_vector(spec_W, grid.dim)

    V = np.zeros(grid.shape)
    W = np.zeros((grid.dim,) + grid.shape)
    divW = np.zeros(grid.shape)
    used = list(v_specs)
    for s in v_specs:
        V += _sample_scalar(s, grid)[0]
    for axis, s in enumerate(w.components):
        if s is None:
            continue
        if s.family == "pure_gauge":
            raise ValueError("pure_gauge is not a component profile; pass it as the gauge part")
        g, grad, _ = _sample_scalar(s, grid)
        W[axis] += g
        divW += grad[axis]
        used.append(s)
    if w.gauge is not None:
        _, grad, lap = _sample_scalar(w.gauge, grid)
        W += grad
        divW += lap
        used.append(w.gauge)

    tails = [s.mu for s in used if s.family == "power_tail"]
    mu = min(tails) if tails else math.inf
    mu_eff = mu if math.isfinite(mu) else NOMINAL_MU
    c_decay = float(sum(_decay_constant(s, mu_eff, grid.dim) for s in used))

    peak = max(np.max(np.abs(V)), np.max(np.abs(W)), 0.0)
    if peak > 0 and math.isfinite(mu):
        tail = c_decay / grid.half_width ** mu
        if tail > tail_tolerance * max(peak, 1.0):
            warnings.warn(f"declared tail c/L^mu = {tail:.2e} at the box edge exceeds the truncation tolerance",
                          stacklevel=2)
    return PotentialData(grid, V, W, divW, mu, c_decay, tuple(used))


def zero_potential(grid: Grid) -> PotentialData:
    return sample_potential(None, None, grid)


# ----------------------------------------------------------------------------
# weighted norms


def weight(grid: Grid, delta: float) -> np.ndarray:
    """(1 + |x|^2)^(delta/2); negative delta gives a decaying weight."""
    return (1.0 + grid.r2) ** (0.5 * delta)


def weighted_norm(f, grid: Grid, params: WeightedNormParams = WeightedNormParams()) -> float:
    """||f||_{L^p_delta} on the grid for p in {2, inf}."""
    f = np.asarray(f)
    if np.any(np.isnan(f)):
        raise ValueError("field contains NaN")
    w = weight(grid, params.delta)
    if params.p == 2:
        return float(np.sqrt(np.sum(np.abs(f) ** 2 * w**2) * grid.cell_volume))
    if params.p == math.inf:
        return float(np.max(np.abs(f) * w))
    raise ValueError("only p = 2 and p = inf are supported")


def central_gradient(f: np.ndarray, grid: Grid) -> list:
    """Second-order central differences (second-order one-sided at the box faces)."""
    if grid.points_per_axis < 4 or min(np.shape(f)) < 4:
        raise ValueError("grid too small for central differences")
    return np.gradient(f, grid.spacing, edge_order=2)


def h1_weighted_norm(f, grid: Grid, delta: float = DEFAULT_DELTA0) -> float:
    """||f||_{H^1_{-delta}} with the gradient taken by central differences."""
    f = np.asarray(f)
    if f.ndim == 1 or f.shape != grid.shape:
        raise ValueError("field does not live on this grid")
    grads = central_gradient(f, grid)
    params = WeightedNormParams(2.0, -delta)
    total = weighted_norm(f, grid, params) ** 2
    total += sum(weighted_norm(g, grid, params) ** 2 for g in grads)
    return float(np.sqrt(total))


# ----------------------------------------------------------------------------
# decay / integrability report


@dataclass(frozen=True)
class ConditionReport:
    passed: bool
    mu: float
    mu_ok: bool
    delta: float
    delta_threshold: float
    delta_ok: bool
    measured: dict
    c_decay: float
    decay_ok: bool
    reasons: tuple
    notes: tuple

    def to_dict(self) -> dict:
        return {
            "passed": self.passed, "mu": self.mu, "mu_ok": self.mu_ok, "delta": self.delta,
            "delta_threshold": self.delta_threshold, "delta_ok": self.delta_ok,
            "measured": dict(self.measured), "c_decay": self.c_decay, "decay_ok": self.decay_ok,
            "reasons": list(self.reasons), "notes": list(self.notes),
        }


def check_conditions(potential: PotentialData, p: float = math.inf,
                     delta: Optional[float] = None) -> ConditionReport:
    """Report the decay exponent, the weight threshold and sampled tail constants.

    ``delta`` is the weight exponent of the coefficient spaces L^p_delta; by
    default it is the decay exponent itself (c/|x|^mu lies in L^inf_mu).  The
    single declared ``mu`` is applied to V, W and div W alike.
    """
    grid = potential.grid
    n = grid.dim
    threshold = 0.5 * (n + 1) - (0.0 if p == math.inf else n / p)
    mu = potential.mu
    mu_eff = mu if math.isfinite(mu) else NOMINAL_MU
    if delta is None:
        delta = mu_eff
    reasons = []
    notes = ["one decay exponent is applied to V, W and div W (the L^inf_delta bound on W and the "
             "L^p_delta bound on grad W are not separated)"]
    if not math.isfinite(mu) and potential.specs:
        notes.append(f"super-polynomial decay; tail constants measured with nominal mu = {NOMINAL_MU}")
    mu_ok = mu > 2.0
    if not mu_ok:
        reasons.append(f"mu <= 2 (mu = {mu:g}); decay condition requires mu > 2")
    delta_ok = delta > threshold
    if not delta_ok:
        reasons.append(f"delta = {delta:g} does not exceed (n+1)/2 - n/p = {threshold:g}")
    if math.isfinite(mu) and mu < 3.0:
        notes.append("mu < 3: angular continuity of the amplitude is not verified at this resolution")

    far = grid.radius > 0.5 * grid.half_width
    scale = grid.radius[far] ** mu_eff
    measured = {
        "V": float(np.max(np.abs(potential.V[far]) * scale, initial=0.0)),
        "W": float(np.max(np.sqrt(np.sum(potential.W[:, far] ** 2, axis=0)) * scale, initial=0.0)),
        "divW": float(np.max(np.abs(potential.divW[far]) * scale, initial=0.0)),
    }
    decay_ok = all(v <= potential.c_decay * (1 + 1e-9) for v in measured.values())
    if not decay_ok:
        reasons.append("sampled |f| |x|^mu exceeds the declared decay constant")
    return ConditionReport(mu_ok and delta_ok and decay_ok, mu, mu_ok, delta, threshold, delta_ok,
                           measured, potential.c_decay, decay_ok, tuple(reasons), tuple(notes))
