"""Config-driven experiments: parse, run, measure, persist.

A config is a TOML file (or a run manifest JSON written by a previous run)
with three tables, ``problem``, ``diagnostics`` and ``output``. Unknown
keys are rejected; every invariant is checked before anything is written.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import tomli

from . import __version__
from .diagnostics import (
    Asymptote,
    THEOREMS,
    decay_fit,
    deviation,
    discrete_gradient,
    lq_norm,
    reference_exponent,
)
from .model import FarField, FluxModel, Grid, ViscosityParams
from .solver import (
    BaseState,
    Boundary,
    InitialSpec,
    NumericalBlowUp,
    Perturbation,
    Problem,
    TimeSchedule,
    run,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "simulate",
    "verify",
    "RunResult",
]


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "problem": {
        "flux": "burgers",
        "coefficients": None,
        "u_range": [-10.0, 10.0],
        "p": None,
        "mu": 1.0,
        "u_minus": 0.0,
        "u_plus": 0.0,
        "boundary": None,
        "initial": {
            "base": "smoothed_rarefaction",
            "value": 0.0,
            "t0": 1.0,
            "C": 1.0,
            "perturbation": None,
        },
        "grid": {"x_min": None, "x_max": None, "n_cells": None},
        "time": {
            "t_end": None,
            "cfl": 0.4,
            "t_start": 0.0,
            "observe": None,
            "t_first": 1.0,
            "ratio": 1.3,
            "log_every": 1,
        },
    },
    "diagnostics": {
        "q_list": [1, 2, "inf"],
        "gradient_exponents": [],
        "alpha": 0.0,
        "fit_window": None,
        "tolerance": 0.15,
        "asymptote": "smoothed",
        "theorem": None,
        "snapshots": False,
    },
    "output": {"directory": "out", "formats": ["csv", "json", "plot"]},
}

_PERTURBATION_KEYS = {
    "amplitude": None,
    "center": 0.0,
    "width": 1.0,
    "shape": "gaussian",
    "tail_exponent": None,
    "cutoff": None,
}

_REQUIRED = {
    "problem.p", "problem.grid.x_min", "problem.grid.x_max",
    "problem.grid.n_cells", "problem.time.t_end",
    "problem.initial.perturbation.amplitude",
}


def _merge(schema, given, path):
    if not isinstance(given, dict):
        raise ConfigError(f"{path or 'config'}: expected a table")
    out = {}
    for key in given:
        if key not in schema:
            where = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown key {where!r}")
    for key, default in schema.items():
        where = f"{path}.{key}" if path else key
        if key == "perturbation":
            val = given.get(key)
            out[key] = None if val is None else _merge(_PERTURBATION_KEYS, val, where)
        elif isinstance(default, dict):
            out[key] = _merge(default, given.get(key, {}), where)
        elif key in given:
            out[key] = given[key]
        else:
            if where in _REQUIRED:
                raise ConfigError(f"missing required key {where!r}")
            out[key] = copy.deepcopy(default)
    return out


def _q_value(q, where):
    if isinstance(q, str):
        if q.lower() != "inf":
            raise ConfigError(f"{where}: q must be a number >= 1 or 'inf'")
        return math.inf
    q = float(q)
    if not q >= 1:
        raise ConfigError(f"{where}: q must be >= 1")
    return q


def _label(v):
    if v == math.inf:
        return "inf"
    return str(int(v)) if float(v).is_integer() else repr(float(v))


@dataclass
class ExperimentConfig:
    raw: dict
    problem: Problem
    q_list: tuple
    gradient_exponents: tuple
    alpha: float
    fit_window: tuple
    tolerance: float
    asymptote: Asymptote
    theorem: str | None
    snapshots: bool
    out_dir: Path
    formats: tuple

    @property
    def p(self):
        return self.problem.visc.p


def _wrap(where, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a raw config mapping and build the :class:`Problem`."""
    raw = _merge(_SCHEMA, data, "")
    pr = raw["problem"]

    flux_kind = pr["flux"]
    lo, hi = _wrap("problem.u_range", lambda r: (float(r[0]), float(r[1])), pr["u_range"])
    if flux_kind == "burgers":
        flux = _wrap("problem.flux", FluxModel.burgers, lo, hi)
    elif flux_kind == "poly":
        if not pr["coefficients"]:
            raise ConfigError("problem.coefficients: required for poly flux")
        flux = _wrap("problem.coefficients", FluxModel.poly, pr["coefficients"], lo, hi)
    elif flux_kind == "none":
        flux = None
    else:
        raise ConfigError(f"problem.flux: unknown flux kind {flux_kind!r}")

    visc = _wrap("problem.p", ViscosityParams, float(pr["p"]), float(pr["mu"]))
    far = _wrap("problem.u_minus", FarField, float(pr["u_minus"]), float(pr["u_plus"]))
    boundary = pr["boundary"] or ("zero_gradient" if flux is None else "dirichlet")
    boundary = _wrap("problem.boundary", Boundary, boundary)

    ini = pr["initial"]
    pert = None
    if ini["perturbation"] is not None:
        pert = _wrap("problem.initial.perturbation", Perturbation, **ini["perturbation"])
    base = _wrap("problem.initial.base", BaseState, ini["base"])
    initial = _wrap("problem.initial", InitialSpec, base, float(ini["value"]),
                    float(ini["t0"]), float(ini["C"]), pert)

    gr = pr["grid"]
    grid = _wrap("problem.grid", Grid, float(gr["x_min"]), float(gr["x_max"]), gr["n_cells"])

    tm = pr["time"]
    extra = dict(cfl=float(tm["cfl"]), log_every=int(tm["log_every"]))
    if tm["observe"] is not None:
        schedule = _wrap("problem.time", TimeSchedule, float(tm["t_end"]),
                         tuple(tm["observe"]), t_start=float(tm["t_start"]), **extra)
    else:
        schedule = _wrap("problem.time", TimeSchedule.geometric, float(tm["t_end"]),
                         float(tm["t_first"]), float(tm["ratio"]),
                         t_start=float(tm["t_start"]), **extra)

    problem = _wrap("problem", Problem, visc, far, initial, grid, schedule, flux, boundary)

    dg = raw["diagnostics"]
    q_list = tuple(_q_value(q, "diagnostics.q_list") for q in dg["q_list"])
    grads = tuple(float(g) for g in dg["gradient_exponents"])
    for g in grads:
        if not g > 1:
            raise ConfigError("diagnostics.gradient_exponents: exponents must exceed 1")
    if dg["fit_window"] is None:
        window = (schedule.t_end / 10.0, schedule.t_end)
    else:
        window = tuple(float(w) for w in dg["fit_window"])
        if len(window) != 2 or not window[0] < window[1]:
            raise ConfigError("diagnostics.fit_window: need [t_lo, t_hi] with t_lo < t_hi")
    theorem = dg["theorem"]
    if theorem is not None and theorem not in THEOREMS:
        raise ConfigError(f"diagnostics.theorem: unknown selector {theorem!r}")
    asym = _wrap("diagnostics.asymptote", Asymptote, dg["asymptote"])
    formats = tuple(raw["output"]["formats"])
    for f in formats:
        if f not in ("csv", "json", "plot"):
            raise ConfigError(f"output.formats: unknown format {f!r}")
    return ExperimentConfig(
        raw=raw, problem=problem, q_list=q_list, gradient_exponents=grads,
        alpha=float(dg["alpha"]), fit_window=window, tolerance=float(dg["tolerance"]),
        asymptote=asym, theorem=theorem, snapshots=bool(dg["snapshots"]),
        out_dir=Path(raw["output"]["directory"]), formats=formats,
    )


def load_config(path) -> ExperimentConfig:
    """Read a TOML config, or the ``config`` block of a run manifest JSON."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    try:
        if path.suffix == ".json":
            data = json.loads(text)
            if "config" in data and "tool" in data:
                data = data["config"]
        else:
            data = tomli.loads(text)
    except (json.JSONDecodeError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"malformed config {str(path)!r}: {exc}") from None
    return parse_config(data)


# -- measuring ------------------------------------------------------------------

@dataclass
class RunResult:
    config: ExperimentConfig
    header: list
    rows: list
    fits: list
    wall_time: float
    steps: int
    max_principle_slack: float


def _columns(cfg: ExperimentConfig):
    cols = ["t", "dt", "mass", "min_u", "max_u", "l1_phi", "l2_phi", "linf_phi"]
    extra_q = [q for q in cfg.q_list if q not in (1.0, 2.0, math.inf)]
    cols += [f"lq_phi_{_label(q)}" for q in extra_q]
    cols += ["grad_lp1_u", "grad_lp1_phi"]
    cols += [f"grad_lr1_u_{_label(g)}" for g in cfg.gradient_exponents]
    return cols, extra_q


def measure(cfg: ExperimentConfig, traj) -> tuple:
    prob = cfg.problem
    ws = prob.wave_state
    p = prob.visc.p
    cols, extra_q = _columns(cfg)
    rows = []
    for t, u, dt in zip(traj.times, traj.snapshots, traj.snapshot_dt):
        phi = deviation(u, t, ws, cfg.asymptote, prob.far_field.u_minus)
        du = discrete_gradient(u)
        dphi = discrete_gradient(phi)
        row = [t, dt, u.integral(), float(u.values.min()), float(u.values.max()),
               lq_norm(phi, 1), lq_norm(phi, 2), lq_norm(phi, math.inf)]
        row += [lq_norm(phi, q) for q in extra_q]
        row += [lq_norm(du, p + 1), lq_norm(dphi, p + 1)]
        row += [lq_norm(du, g) for g in cfg.gradient_exponents]
        rows.append([float(v) for v in row])
    return cols, rows


def _fit_targets(cfg: ExperimentConfig):
    """(column, quantity, q-or-exponent, reference) for every reported fit."""
    p = cfg.p
    th = cfg.theorem
    targets = []
    named = {1.0: "l1_phi", 2.0: "l2_phi", math.inf: "linf_phi"}
    for q in cfg.q_list:
        col = named.get(q, f"lq_phi_{_label(q)}")
        ref = None
        if th is not None:
            try:
                ref = reference_exponent(th, p, q=q, quantity="lq")
            except ValueError:
                ref = None
        targets.append((col, "lq", q, ref))
    ref = None
    if th in ("Thm1.2", "Thm1.5", "Thm7.2"):
        ref = reference_exponent(th, p, quantity="grad")
    targets.append(("grad_lp1_u", "grad", p + 1, ref))
    for g in cfg.gradient_exponents:
        ref = None
        if th in ("Thm1.3", "Thm1.6", "Thm7.3") and g - 1 > p:
            ref = reference_exponent(th, p, r=g - 1, quantity="grad")
        targets.append((f"grad_lr1_u_{_label(g)}", "grad", g, ref))
    return targets


def compute_fits(cfg: ExperimentConfig, cols, rows):
    data = np.array(rows, dtype=float) if rows else np.zeros((0, len(cols)))
    times = data[:, 0] if rows else np.zeros(0)
    fits = []
    for col, quantity, expo, ref in _fit_targets(cfg):
        entry = {"column": col, "quantity": quantity, "exponent_of_norm": _label(expo),
                 "theorem": cfg.theorem, "reference_exponent": ref}
        vals = data[:, cols.index(col)] if rows else np.zeros(0)
        try:
            fit = decay_fit(times, vals, ref if ref is not None else math.nan,
                            cfg.fit_window, cfg.tolerance)
        except ValueError as exc:
            entry.update(fitted_exponent=None, passed=None, note=str(exc))
        else:
            entry.update(fitted_exponent=fit.exponent, intercept=fit.intercept,
                         r_squared=fit.r_squared, window=list(fit.window),
                         n_samples=fit.n_samples, tolerance=fit.tolerance,
                         passed=fit.passed if ref is not None else None)
        fits.append(entry)
    return fits


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def simulate(cfg: ExperimentConfig, out_dir=None) -> RunResult:
    """Run the configured problem and write manifest, norms, fits and plots.

    Raises :class:`NumericalBlowUp` (nothing written) if the run fails.
    """
    out = Path(out_dir) if out_dir is not None else cfg.out_dir
    started = time.perf_counter()
    traj = run(cfg.problem)
    cols, rows = measure(cfg, traj)
    fits = compute_fits(cfg, cols, rows)
    wall = time.perf_counter() - started

    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "plap-claw",
        "version": __version__,
        "config": cfg.raw,
        "wall_time_s": wall,
        "steps": traj.steps,
        "max_principle_slack": traj.max_principle_slack,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    if "csv" in cfg.formats:
        (out / "norms.csv").write_text(_csv_text(cols, rows), encoding="utf-8")
        if cfg.snapshots:
            snap_rows = []
            ws = cfg.problem.wave_state
            for t, u in zip(traj.times, traj.snapshots):
                phi = deviation(u, t, ws, cfg.asymptote, cfg.problem.far_field.u_minus)
                for x, uv, pv in zip(u.x, u.values, phi.values):
                    snap_rows.append((t, x, uv, pv))
            (out / "snapshots.csv").write_text(
                _csv_text(["t", "x", "u", "phi"], snap_rows), encoding="utf-8")
    if "json" in cfg.formats:
        (out / "fits.json").write_text(json.dumps(fits, indent=2) + "\n", encoding="utf-8")
    if "plot" in cfg.formats:
        data = np.array(rows)
        for j, col in enumerate(cols[5:], start=5):
            keep = data[:, j] > 0
            lines = [f"{repr(float(np.log10(1 + t)))} {repr(float(np.log10(v)))}"
                     for t, v in zip(data[keep, 0], data[keep, j])]
            (out / f"plot_{col}.dat").write_text(
                "# log10(1+t) log10(value)\n" + "\n".join(lines) + "\n", encoding="utf-8")
    return RunResult(cfg, cols, rows, fits, wall, traj.steps, traj.max_principle_slack)


def verdict_rows(result: RunResult):
    rows = []
    for f in result.fits:
        if f["reference_exponent"] is None:
            continue
        rows.append({
            "theorem": result.config.theorem,
            "quantity": f["column"],
            "q": f["exponent_of_norm"],
            "reference_exponent": f["reference_exponent"],
            "fitted_exponent": f["fitted_exponent"],
            "pass": bool(f["passed"]),
        })
    return rows


def verify(cfg: ExperimentConfig, out_dir=None):
    """Simulate, then judge every fit with a theorem reference rate.

    Returns ``(all_passed, verdict_rows, result)``.
    """
    if cfg.theorem is None:
        raise ConfigError("diagnostics.theorem: required for verify")
    result = simulate(cfg, out_dir)
    rows = verdict_rows(result)
    out = Path(out_dir) if out_dir is not None else cfg.out_dir
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theorem", "quantity", "q", "reference_exponent", "fitted_exponent", "pass"])
    for r in rows:
        fitted = "" if r["fitted_exponent"] is None else repr(r["fitted_exponent"])
        w.writerow([r["theorem"], r["quantity"], r["q"], repr(r["reference_exponent"]),
                    fitted, "pass" if r["pass"] else "FAIL"])
    (out / "verdict.csv").write_text(buf.getvalue(), encoding="utf-8")
    ok = bool(rows) and all(r["pass"] for r in rows)
    return ok, rows, result


__all__ += ["NumericalBlowUp", "measure", "compute_fits", "verdict_rows"]
