"""
Configuration-driven command line front end.

    magscatter {solve,amplitude,born,compare,sweep,invert} --config run.json --out results/

Every run writes ``config.json`` (a byte-identical copy of the input),
``diagnostics.json`` and command-specific CSV / field binaries into the
output directory.  Exit codes: 0 success, 2 invalid configuration,
3 numerical failure; failures also write ``error.json``.
"""

from __future__ import annotations

import argparse
import contextlib
import copy
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import __version__
from .born import (backscatter_born, backscatter_records, born_amplitude, hemisphere_directions,
                   improved_backscatter, invert_backscatter, remainder_bound, second_order_fourier)
from .farfield import amplitude_values, direction_set, farfield_fit
from .fields import (Grid, PotentialData, PotentialSpec, VectorSpec, WeightedNormParams, check_conditions,
                     make_grid, sample_potential, weighted_norm)
from .io import plot_text, slice_text, atomic_write, read_csv, read_field, write_csv, write_field, write_json
from .ls import (ConvergenceError, DivergenceError, LkOperator, WaveParams, estimate_operator_norm,
                 solve_born_series, solve_direct, verify_agmon_decay)

COMMANDS = ("solve", "amplitude", "born", "compare", "sweep", "invert")
PLOT_KINDS = ("amplitude", "slice", "sweep")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

_scalar = {
    "type": "object",
    "required": ["family"],
    "additionalProperties": False,
    "properties": {
        "family": {"enum": ["gaussian_bump", "smooth_compact_bump", "power_tail"]},
        "amplitude": {"type": "number"},
        "width": {"type": "number", "exclusiveMinimum": 0},
        "center": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 3},
        "mu": {"type": "number", "exclusiveMinimum": 0},
    },
}
_vector3 = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 3}
_grid = {
    "type": "object",
    "required": ["dim", "half_width", "m"],
    "additionalProperties": False,
    "properties": {
        "dim": {"enum": [2, 3]},
        "half_width": {"type": "number", "exclusiveMinimum": 0},
        "m": {"type": "integer", "minimum": 8, "multipleOf": 2},
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["grid", "wave"],
    "additionalProperties": False,
    "properties": {
        "grid": _grid,
        "potential": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "V": {"type": "array", "items": _scalar},
                "W": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "components": {"type": "array", "items": {"oneOf": [_scalar, {"type": "null"}]}},
                        "gauge": _scalar,
                    },
                },
            },
        },
        "wave": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k": {"type": "number", "exclusiveMinimum": 0},
                "k_list": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "theta": _vector3,
                "theta_list": {"type": "array", "items": _vector3, "minItems": 1},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["direct", "born_series"]},
                "tol": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "max_terms": {"type": "integer", "minimum": 1},
                "max_iters": {"type": "integer", "minimum": 1},
                "delta": {"type": "number", "exclusiveMinimum": 0.5},
                "kernel": {"enum": ["spectral", "corrected"]},
                "gradient": {"enum": ["spectral", "central"]},
                "quadrature": {"enum": ["fft", "dense"]},
                "norm_iters": {"type": "integer", "minimum": 10},
            },
        },
        "born": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "pv_shell_gap": {"type": "number", "exclusiveMinimum": 0},
                "angular_order": {"type": "integer", "minimum": 2},
            },
        },
        "amplitude": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directions": {"oneOf": [{"enum": ["backscatter", "all"]},
                                         {"type": "array", "items": _vector3, "minItems": 1}]},
                "order": {"type": "integer", "minimum": 4},
                "farfield_radii": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                                   "minItems": 3},
            },
        },
        "sweep": {
            "type": "object",
            "required": ["axis", "values"],
            "additionalProperties": False,
            "properties": {
                "axis": {"enum": ["epsilon", "k", "resolution"]},
                "values": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
            },
        },
        "invert": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k_min": {"type": "number", "exclusiveMinimum": 0},
                "k_max": {"type": "number", "exclusiveMinimum": 0},
                "k_count": {"type": "integer", "minimum": 2},
                "directions": {"type": "integer", "minimum": 4},
                "source": {"enum": ["born", "solver"]},
                "output_grid": _grid,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fields": {"type": "boolean"},
                "plotdata": {"type": "array", "items": {"enum": list(PLOT_KINDS)}},
            },
        },
    },
}

SOLVER_DEFAULTS = {"method": "direct", "tol": 1e-8, "max_terms": 60, "max_iters": 200, "delta": 1.0,
                   "kernel": "spectral", "gradient": "spectral", "quadrature": "fft", "norm_iters": 30}
BORN_DEFAULTS = {"pv_shell_gap": None, "angular_order": 8}


class ConfigError(ValueError):
    """Invalid configuration (exit code 2)."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(message)
        self.details = details or {}


class NumericalFailure(RuntimeError):
    """Divergence or non-convergence (exit code 3)."""

    def __init__(self, message: str, quantity: str, diagnostics: dict):
        super().__init__(message)
        self.quantity = quantity
        self.diagnostics = diagnostics


# ----------------------------------------------------------------------------
# configuration


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    raw: dict
    grid: Grid
    spec_V: tuple
    spec_W: Optional[VectorSpec]
    k_list: tuple
    theta_list: tuple
    solver: dict
    born: dict
    amplitude: dict = field(default_factory=dict)
    sweep: Optional[dict] = None
    invert: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)


def _scalar_spec(d: dict, dim: int) -> PotentialSpec:
    center = d.get("center")
    if center is not None and len(center) != dim:
        raise ConfigError(f"potential center {center} does not match dimension {dim}")
    return PotentialSpec(d["family"], d.get("amplitude", 1.0), d.get("width", 1.0),
                         None if center is None else tuple(center), d.get("mu"))


def _unit(v, dim: int, name: str) -> tuple:
    v = np.asarray(v, dtype=float)
    if v.shape != (dim,):
        raise ConfigError(f"{name} must have {dim} components")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-12:
        raise ConfigError(f"{name} must be a unit vector (|{name}| = {norm!r})")
    return tuple(float(x) for x in v)


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate against :data:`CONFIG_SCHEMA` and range-check the values the pipelines use."""
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from None
    g = raw["grid"]
    grid = make_grid(g["dim"], float(g["half_width"]), g["m"])
    dim = grid.dim
    pot = raw.get("potential", {})
    spec_V = tuple(_scalar_spec(d, dim) for d in pot.get("V", []))
    spec_W = None
    if "W" in pot:
        w = pot["W"]
        comps = tuple(None if c is None else _scalar_spec(c, dim) for c in w.get("components", []))
        if comps and len(comps) != dim:
            raise ConfigError(f"W needs {dim} components, got {len(comps)}")
        gauge = _scalar_spec(w["gauge"], dim) if "gauge" in w else None
        spec_W = VectorSpec(comps, gauge)

    wave = raw["wave"]
    if ("k" in wave) == ("k_list" in wave):
        raise ConfigError("wave needs exactly one of k, k_list")
    k_list = (float(wave["k"]),) if "k" in wave else tuple(float(k) for k in wave["k_list"])
    if ("theta" in wave) == ("theta_list" in wave):
        raise ConfigError("wave needs exactly one of theta, theta_list")
    thetas = [wave["theta"]] if "theta" in wave else wave["theta_list"]
    theta_list = tuple(_unit(t, dim, "theta") for t in thetas)

    solver = {**SOLVER_DEFAULTS, **raw.get("solver", {})}
    born = {**BORN_DEFAULTS, **raw.get("born", {})}
    if born["pv_shell_gap"] is not None and born["pv_shell_gap"] >= min(k_list) / 4:
        raise ConfigError("born.pv_shell_gap must be below k/4 for every k")
    sweep = raw.get("sweep")
    if sweep is not None:
        vals = sweep["values"]
        diffs = np.diff(vals)
        if len(vals) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError("sweep values must be strictly monotone")
        if sweep["axis"] == "resolution" and any(v != int(v) or int(v) % 2 or v < 8 for v in vals):
            raise ConfigError("resolution sweep values must be even integers >= 8")
    inv = dict(raw.get("invert", {}))
    if inv and inv.get("k_min", 0.5) >= inv.get("k_max", 4.0):
        raise ConfigError("invert.k_min must be below invert.k_max")
    amp = dict(raw.get("amplitude", {}))
    for t in amp.get("directions", []) if isinstance(amp.get("directions"), list) else []:
        _unit(t, dim, "amplitude direction")
    return ExperimentConfig(raw, grid, spec_V, spec_W, k_list, theta_list, solver, born, amp, sweep, inv,
                            dict(raw.get("output", {})))


def load_config(path) -> tuple[ExperimentConfig, bytes]:
    data = Path(path).read_bytes()
    try:
        raw = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(raw), data


def build_potential(cfg: ExperimentConfig, grid: Optional[Grid] = None) -> PotentialData:
    grid = grid or cfg.grid
    try:
        return sample_potential(list(cfg.spec_V), cfg.spec_W, grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _conditions(potential: PotentialData) -> dict:
    report = check_conditions(potential)
    if not report.mu_ok or not report.delta_ok:
        raise ConfigError("; ".join(report.reasons), {"condition_report": report.to_dict()})
    return report.to_dict()


# ----------------------------------------------------------------------------
# pipelines


def _solve(cfg: ExperimentConfig, potential: PotentialData, wave: WaveParams):
    s = cfg.solver
    common = dict(kernel=s["kernel"], gradient=s["gradient"], quadrature=s["quadrature"])
    try:
        if s["method"] == "born_series":
            return solve_born_series(potential, wave, max_terms=s["max_terms"], tol=s["tol"],
                                     delta0=s["delta"], **common)
        return solve_direct(potential, wave, tol=s["tol"], max_iters=s["max_iters"], **common)
    except DivergenceError as exc:
        raise NumericalFailure(str(exc), "born_increment_ratio",
                               {"born_increment_ratios": exc.ratios, "k": wave.k, "theta": wave.theta}) from None
    except ConvergenceError as exc:
        raise NumericalFailure(str(exc), "linear_residual",
                               {"linear_residual": exc.best_residual, "iterations": exc.iterations,
                                "k": wave.k, "theta": wave.theta}) from None


def _norm_terms(cfg: ExperimentConfig, potential: PotentialData, wave: WaveParams) -> dict:
    """Power-iteration norm estimate c1, c0 = ||tilde_u0||_{-delta} and the remainder bound."""
    s = cfg.solver
    delta = s["delta"]
    c1 = estimate_operator_norm(potential, wave.k, delta, s["norm_iters"], s["kernel"], s["gradient"])
    op = LkOperator(potential, wave.k, s["kernel"], s["gradient"], s["quadrature"])
    c0 = weighted_norm(op.tilde_u0(wave), potential.grid, WeightedNormParams(2.0, -delta))
    bound = remainder_bound(c0, c1) if c1 < 1 else math.nan
    return {"norm_estimate": c1, "c0": c0, "remainder_bound": bound}


def _theta_primes(cfg: ExperimentConfig, theta: tuple) -> np.ndarray:
    spec = cfg.amplitude.get("directions", "backscatter")
    if spec == "backscatter":
        return -np.asarray(theta)[None, :]
    if spec == "all":
        return direction_set(cfg.grid.dim, cfg.amplitude.get("order")).directions
    return np.asarray(spec, dtype=float)


def _dir_cols(prefix: str, dim: int) -> list:
    return [f"{prefix}_{c}" for c in "xyz"[:dim]]


def run_solve(cfg: ExperimentConfig, out: Path) -> dict:
    potential = build_potential(cfg)
    diag = {"condition_report": _conditions(potential), "runs": []}
    for k in cfg.k_list:
        for i, theta in enumerate(cfg.theta_list):
            wave = WaveParams(k, theta)
            sol = _solve(cfg, potential, wave)
            name = f"u_sc_k{k:g}_d{i}.bin"
            write_field(out / name, sol.u_sc, cfg.grid)
            diag["runs"].append({"k": k, "theta": list(theta), "field": name, "method": sol.method,
                                 "iterations": sol.iterations, "linear_residual": sol.linear_residual,
                                 "converged": sol.converged, **_norm_terms(cfg, potential, wave)})
    return diag


def _amplitude_rows(cfg: ExperimentConfig, potential: PotentialData, k: float, theta: tuple, sol) -> list:
    tps = _theta_primes(cfg, theta)
    values = amplitude_values(sol, potential, tps)
    radii = cfg.amplitude.get("farfield_radii")
    rows = []
    for tp, v in zip(tps, values):
        row = [k, *theta, *tp, v.real, v.imag, abs(v), "integral_3_1"]
        rows.append(row)
        if radii:
            f = farfield_fit(sol, potential, radii=radii, theta_prime=tp)
            rows.append([k, *theta, *tp, f.real, f.imag, abs(f), "farfield_fit"])
    return rows


def run_amplitude(cfg: ExperimentConfig, out: Path) -> dict:
    potential = build_potential(cfg)
    diag = {"condition_report": _conditions(potential), "runs": []}
    rows = []
    for k in cfg.k_list:
        for theta in cfg.theta_list:
            wave = WaveParams(k, theta)
            sol = _solve(cfg, potential, wave)
            rows.extend(_amplitude_rows(cfg, potential, k, theta, sol))
            diag["runs"].append({"k": k, "theta": list(theta), "iterations": sol.iterations,
                                 "linear_residual": sol.linear_residual})
            if cfg.output.get("fields"):
                write_field(out / f"u_sc_k{k:g}_d{len(diag['runs']) - 1}.bin", sol.u_sc, cfg.grid)
    n = cfg.grid.dim
    write_csv(out / "amplitude.csv", ["k", *_dir_cols("theta", n), *_dir_cols("theta_prime", n),
                                      "re", "im", "abs", "method"], rows)
    return diag


def _second_order(cfg, potential, k, theta):
    try:
        return second_order_fourier(potential, k, theta, pv_shell_gap=cfg.born["pv_shell_gap"],
                                    angular_order=cfg.born["angular_order"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def run_born(cfg: ExperimentConfig, out: Path) -> dict:
    potential = build_potential(cfg)
    diag = {"condition_report": _conditions(potential)}
    n = cfg.grid.dim
    rows, terms = [], []
    for k in cfg.k_list:
        for theta in cfg.theta_list:
            for tp in _theta_primes(cfg, theta):
                v = born_amplitude(potential, k, theta, tp)
                rows.append([k, *theta, *tp, v.real, v.imag, abs(v), "born_first_order"])
            I = _second_order(cfg, potential, k, theta)
            ab = backscatter_born(potential, k, theta)
            imp = ab + I.total
            terms.append([k, *theta, ab.real, ab.imag] + [x for v in I.as_dict().values() for x in (v.real, v.imag)]
                         + [imp.real, imp.imag])
    write_csv(out / "born.csv", ["k", *_dir_cols("theta", n), *_dir_cols("theta_prime", n),
                                 "re", "im", "abs", "method"], rows)
    write_csv(out / "second_order.csv",
              ["k", *_dir_cols("theta", n), "born_back_re", "born_back_im", "I1_re", "I1_im", "I2_re", "I2_im",
               "I3_re", "I3_im", "I4_re", "I4_im", "improved_re", "improved_im"], terms)
    return diag


def _compare_one(cfg, potential, k, theta) -> dict:
    wave = WaveParams(k, theta)
    sol = _solve(cfg, potential, wave)
    A = complex(amplitude_values(sol, potential, -np.asarray(theta)[None, :])[0])
    AB = backscatter_born(potential, k, theta)
    I = _second_order(cfg, potential, k, theta) if not potential.is_zero else None
    imp = AB + (I.total if I is not None else 0j)
    return {"A": A, "A_B": AB, "A_improved": imp, "err_born": abs(A - AB), "err_improved": abs(A - imp),
            "residual": sol.linear_residual, "iterations": sol.iterations, **_norm_terms(cfg, potential, wave)}


def run_compare(cfg: ExperimentConfig, out: Path) -> dict:
    potential = build_potential(cfg)
    diag = {"condition_report": _conditions(potential), "runs": []}
    n = cfg.grid.dim
    rows = []
    for k in cfg.k_list:
        for theta in cfg.theta_list:
            r = _compare_one(cfg, potential, k, theta)
            rows.append([k, *theta, r["A"].real, r["A"].imag, r["A_B"].real, r["A_B"].imag,
                         r["A_improved"].real, r["A_improved"].imag, r["err_born"], r["err_improved"]])
            diag["runs"].append({"k": k, "theta": list(theta), **{key: r[key] for key in
                                 ("residual", "iterations", "norm_estimate", "c0", "remainder_bound")}})
    write_csv(out / "compare.csv", ["k", *_dir_cols("theta", n), "A_re", "A_im", "A_B_re", "A_B_im",
                                    "A_improved_re", "A_improved_im", "abs_A_minus_A_B",
                                    "abs_A_minus_A_improved"], rows)
    return diag


SWEEP_COLUMNS = ["value", "abs_A_minus_A_B", "abs_A_minus_A_improved", "norm_estimate", "residual",
                 "remainder_bound", "k_resolvent_ratio"]


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2 or np.any(x <= 0) or np.any(y <= 0):
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def run_sweep(cfg: ExperimentConfig, out: Path) -> dict:
    if cfg.sweep is None:
        raise ConfigError("sweep command needs a 'sweep' block")
    axis, values = cfg.sweep["axis"], cfg.sweep["values"]
    k0, theta = cfg.k_list[0], cfg.theta_list[0]
    base = build_potential(cfg)
    diag = {"condition_report": _conditions(base), "axis": axis, "runs": []}
    rows = []
    failure = None
    for v in values:
        k, potential = k0, base
        if axis == "epsilon":
            potential = base.scaled(v)
        elif axis == "k":
            k = float(v)
        else:
            g = cfg.grid
            potential = build_potential(cfg, make_grid(g.dim, g.half_width, int(v)))
        try:
            r = _compare_one(cfg, potential, k, theta)
        except NumericalFailure as exc:
            failure = exc
            break
        probe = potential.q_tilde if not potential.is_zero else None
        agmon = math.nan
        if probe is not None and k >= 1:
            agmon = verify_agmon_decay(potential.grid, cfg.solver["delta"], [k], probe, cfg.solver["kernel"])[0].scaled
        row = [v, r["err_born"], r["err_improved"], r["norm_estimate"], r["residual"], r["remainder_bound"], agmon]
        rows.append(row)
        diag["runs"].append(dict(zip(SWEEP_COLUMNS, row)))
    table = [list(map(float, r)) for r in rows]
    summary = []
    if len(rows) > 1:
        xs = [r[0] for r in rows]
        summary = [["slope", loglog_slope(xs, [r[1] for r in rows]), loglog_slope(xs, [r[2] for r in rows]),
                    "", "", "", ""]]
        diag["slopes"] = {"abs_A_minus_A_B": summary[0][1], "abs_A_minus_A_improved": summary[0][2]}
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, table + summary)
    if failure is not None:
        failure.diagnostics = {**failure.diagnostics, "completed_rows": len(rows), "failed_value": values[len(rows)]}
        raise failure
    return diag


def run_invert(cfg: ExperimentConfig, out: Path) -> dict:
    if cfg.grid.dim != 2:
        raise ConfigError("the invert command tabulates half-circle directions and needs dim = 2")
    inv = cfg.invert
    ks = np.linspace(inv.get("k_min", 0.5), inv.get("k_max", 4.0), inv.get("k_count", 16))
    dirs = hemisphere_directions(2, inv.get("directions", 32))
    g = inv.get("output_grid", {"dim": 2, "half_width": cfg.grid.half_width, "m": cfg.grid.points_per_axis})
    if g["dim"] != 2:
        raise ConfigError("invert.output_grid must be 2D")
    out_grid = make_grid(2, float(g["half_width"]), g["m"])
    potential = build_potential(cfg)
    diag = {"condition_report": _conditions(potential)}
    source = inv.get("source", "born")
    if source == "born":
        records = backscatter_records(lambda k, th: backscatter_born(potential, k, th), ks, dirs)
    else:
        def full(k, th):
            sol = _solve(cfg, potential, WaveParams(k, th))
            return amplitude_values(sol, potential, -np.asarray(th)[None, :])[0]
        records = backscatter_records(full, ks, dirs, "integral_3_1")
    try:
        recon = invert_backscatter(records, out_grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    write_field(out / "reconstruction.bin", recon, out_grid)
    write_csv(out / "backscatter.csv", ["k", "theta_x", "theta_y", "re", "im", "method"],
              [[r.k, *r.theta, r.value.real, r.value.imag, r.method] for r in records])
    idx = np.unravel_index(int(np.argmax(recon)), recon.shape)
    diag["peak_location"] = [float(out_grid.axis[i]) for i in idx]
    diag["peak_value"] = float(recon[idx])
    diag["source"] = source
    return diag


PIPELINES = {"solve": run_solve, "amplitude": run_amplitude, "born": run_born, "compare": run_compare,
             "sweep": run_sweep, "invert": run_invert}


# ----------------------------------------------------------------------------
# plot data


def export_plotdata(out_dir, kind: str) -> list:
    """Write gnuplot-ready text for ``kind`` in {amplitude, slice, sweep}; returns the paths."""
    out_dir = Path(out_dir)
    if kind not in PLOT_KINDS:
        raise ConfigError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    written = []
    if kind == "amplitude":
        src = out_dir / "amplitude.csv"
        if not src.exists():
            raise ConfigError("bundle has no amplitude.csv")
        header, rows = read_csv(src)
        cols = {name: i for i, name in enumerate(header)}
        data = []
        for r in rows:
            tp = [float(r[cols[c]]) for c in header if c.startswith("theta_prime_")]
            angle = math.atan2(tp[1], tp[0])
            data.append([angle, float(r[cols["abs"]]), float(r[cols["re"]]), float(r[cols["im"]])])
        written.append(atomic_write(out_dir / "amplitude_vs_angle.dat",
                                    plot_text(["angle", "abs", "re", "im"], data, "amplitude vs azimuth of theta'")))
    elif kind == "slice":
        for path in sorted(out_dir.glob("u_sc_*.bin")):
            f, grid = read_field(path)
            written.append(atomic_write(path.with_suffix(".slice.dat"),
                                        slice_text(f, grid, "abs", f"central slice of {path.name}")))
        if not written:
            raise ConfigError("bundle has no field binaries")
    else:
        src = out_dir / "sweep.csv"
        if not src.exists():
            raise ConfigError("bundle has no sweep.csv")
        header, rows = read_csv(src)
        data = [[float(x) if x else math.nan for x in r] for r in rows if r[0] != "slope"]
        written.append(atomic_write(out_dir / "sweep.dat", plot_text(header, data, "sweep curves")))
    return written


# ----------------------------------------------------------------------------
# entry point


def _thread_limit():
    value = os.environ.get("MAGSCATTER_THREADS")
    if not value:
        return contextlib.nullcontext()
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"MAGSCATTER_THREADS must be a positive integer, got {value!r}") from None
    if n < 1:
        raise ConfigError(f"MAGSCATTER_THREADS must be a positive integer, got {value!r}")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def run(command: str, config_path, out_dir, quadrature: Optional[str] = None) -> int:
    """Execute one command; returns the process exit code."""
    out = Path(out_dir)
    try:
        cfg, raw_bytes = load_config(config_path)
        if quadrature is not None:
            raw = copy.deepcopy(cfg.raw)
            raw.setdefault("solver", {})["quadrature"] = quadrature
            cfg = parse_config(raw)
        out.mkdir(parents=True, exist_ok=True)
        (out / "error.json").unlink(missing_ok=True)  # stale from an earlier failed run
        atomic_write(out / "config.json", raw_bytes)
        with _thread_limit():
            diag = PIPELINES[command](cfg, out)
        diag = {"command": command, "tool_version": __version__, **diag}
        write_json(out / "diagnostics.json", diag)
        for kind in cfg.output.get("plotdata", []):
            export_plotdata(out, kind)
        return EXIT_OK
    except ConfigError as exc:
        return _fail(out, EXIT_CONFIG, "validation", str(exc), None, exc.details)
    except NumericalFailure as exc:
        return _fail(out, EXIT_NUMERICAL, "numerical", str(exc), exc.quantity, exc.diagnostics)
    except FileNotFoundError as exc:
        return _fail(out, EXIT_CONFIG, "validation", str(exc), None, {})


def _fail(out: Path, code: int, kind: str, message: str, quantity, details: dict) -> int:
    payload = {"exit_code": code, "error": kind, "message": message, "quantity": quantity,
               "diagnostics": details, "tool_version": __version__}
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "error.json", payload)
    except OSError:
        pass
    print(json.dumps(payload, default=str), file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magscatter", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment configuration")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--quadrature", choices=["fft", "dense"], help="override solver.quadrature")
        p.add_argument("--seed", type=int, default=None, help="reserved; core paths are deterministic")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args.command, args.config, args.out, args.quadrature)


if __name__ == "__main__":
    sys.exit(main())
