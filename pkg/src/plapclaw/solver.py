"""Finite-volume solver for ``u_t + f(u)_x = mu (|u_x|^{p-1} u_x)_x``.

Cell-centred conservative scheme: Rusanov convective flux, two-point
degenerate diffusive flux, two-stage SSP Runge-Kutta in time. The time
loop itself runs inside a numba kernel; Python only sees snapshots.

Setting ``flux=None`` drops the convective term, which gives the pure
p-Laplacian evolution equation.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numba
import numpy as np

from .model import Field, FarField, FluxModel, Grid, ViscosityParams, signed_pow
from .oracles import BarenblattParams, barenblatt_field
from .waves import WaveKind, WaveState, sample_wave

__all__ = [
    "Boundary",
    "BaseState",
    "BumpShape",
    "Perturbation",
    "InitialSpec",
    "TimeSchedule",
    "Problem",
    "Trajectory",
    "NumericalBlowUp",
    "numerical_flux",
    "viscous_flux",
    "stable_dt",
    "step",
    "run",
    "run_ensemble",
]

DT_FLOOR = 1e-14


class NumericalBlowUp(RuntimeError):
    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} at t={t!r}")
        self.t = t


class Boundary(str, Enum):
    DIRICHLET = "dirichlet"
    ZERO_GRADIENT = "zero_gradient"


class BaseState(str, Enum):
    SMOOTHED_RAREFACTION = "smoothed_rarefaction"
    EXACT_RIEMANN = "exact_riemann"
    CONSTANT = "constant"
    BARENBLATT = "barenblatt"


class BumpShape(str, Enum):
    GAUSSIAN = "gaussian"
    HAT = "hat"
    ALGEBRAIC = "algebraic"


@dataclass(frozen=True)
class Perturbation:
    """Additive bump on top of the base state.

    ``ALGEBRAIC`` bumps decay like ``|x|^-tail_exponent`` and are cut off
    smoothly (C² taper) between ``0.8 * cutoff`` and ``cutoff``; with an
    exponent in (1/2, 1] they are square-integrable but carry a large L¹
    mass.
    """

    amplitude: float
    center: float = 0.0
    width: float = 1.0
    shape: BumpShape = BumpShape.GAUSSIAN
    tail_exponent: float | None = None
    cutoff: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "shape", BumpShape(self.shape))
        if not self.width > 0:
            raise ValueError("perturbation width must be positive")
        if self.shape is BumpShape.ALGEBRAIC:
            if self.tail_exponent is None or self.tail_exponent <= 0.5:
                raise ValueError("algebraic perturbation needs tail_exponent > 1/2")
            if self.cutoff is None or self.cutoff <= 0:
                raise ValueError("algebraic perturbation needs a positive cutoff")

    def __call__(self, x):
        s = (np.asarray(x, dtype=float) - self.center) / self.width
        if self.shape is BumpShape.GAUSSIAN:
            return self.amplitude * np.exp(-s * s)
        if self.shape is BumpShape.HAT:
            return self.amplitude * np.maximum(0.0, 1.0 - np.abs(s))
        r = np.abs(np.asarray(x, dtype=float) - self.center)
        z = np.clip((r - 0.8 * self.cutoff) / (0.2 * self.cutoff), 0.0, 1.0)
        taper = 1.0 - z**3 * (10.0 - 15.0 * z + 6.0 * z * z)
        return self.amplitude * (1.0 + s * s) ** (-0.5 * self.tail_exponent) * taper


@dataclass(frozen=True)
class InitialSpec:
    base: BaseState = BaseState.SMOOTHED_RAREFACTION
    value: float = 0.0
    t0: float = 1.0
    C: float = 1.0
    perturbation: Perturbation | None = None

    def __post_init__(self):
        object.__setattr__(self, "base", BaseState(self.base))
        if self.base is BaseState.BARENBLATT:
            if not self.t0 > 0:
                raise ValueError("Barenblatt initial time t0 must be positive")
            if not self.C > 0:
                raise ValueError("Barenblatt constant C must be positive")


@dataclass(frozen=True)
class TimeSchedule:
    """Integration window, CFL number and the snapshot times.

    ``log_every`` thins the per-step log; the max-principle monitor in the
    trajectory still covers every step.
    """

    t_end: float
    observe: tuple = ()
    cfl: float = 0.4
    t_start: float = 0.0
    log_every: int = 1

    def __post_init__(self):
        obs = tuple(float(t) for t in self.observe)
        object.__setattr__(self, "observe", obs)
        if not 0.0 < self.cfl < 1.0:
            raise ValueError("CFL number must lie in (0, 1)")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if list(obs) != sorted(obs):
            raise ValueError("observation times must be sorted")
        if obs and (obs[0] < self.t_start or obs[-1] > self.t_end):
            raise ValueError("observation times must lie within [t_start, t_end]")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")

    @classmethod
    def geometric(cls, t_end, t_first=1.0, ratio=1.3, *, t_start=0.0,
                  include_start=True, **kw):
        """Snapshots at ``t_first * ratio**k`` up to ``t_end`` (plus ``t_end``)."""
        times = [t_start] if include_start else []
        k = 0
        while True:
            t = t_first * ratio**k
            if t >= t_end * (1 - 1e-12):
                break
            if t > t_start:
                times.append(t)
            k += 1
        times.append(float(t_end))
        return cls(t_end=t_end, observe=tuple(times), t_start=t_start, **kw)


@dataclass(frozen=True)
class Problem:
    visc: ViscosityParams
    far_field: FarField
    initial: InitialSpec
    grid: Grid
    time: TimeSchedule
    flux: FluxModel | None = None
    boundary: Boundary = Boundary.DIRICHLET
    _u0: np.ndarray = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        g = self.grid
        lm, lp = (0.0, 0.0) if self.flux is None else self.far_field.lambdas(self.flux)
        need_left = abs(lm) * self.time.t_end + 10.0
        need_right = abs(lp) * self.time.t_end + 10.0
        if not (-g.x_min > need_left and g.x_max > need_right):
            raise ValueError(
                "grid too narrow: need x_min < "
                f"{-need_left:g} and x_max > {need_right:g} for t_end={self.time.t_end:g}"
            )
        if self.initial.base in (BaseState.SMOOTHED_RAREFACTION, BaseState.EXACT_RIEMANN):
            if self.flux is None:
                raise ValueError("rarefaction initial data requires a flux")
        if self.flux is not None:
            amp = abs(self.initial.perturbation.amplitude) if self.initial.perturbation else 0.0
            margin = 1.0 + amp
            lo = self.far_field.u_minus - margin
            hi = self.far_field.u_plus + margin
            if self.initial.base is BaseState.CONSTANT:
                lo = min(lo, self.initial.value - margin)
                hi = max(hi, self.initial.value + margin)
            if lo < self.flux.u_lo or hi > self.flux.u_hi:
                raise ValueError(
                    f"flux admissible interval [{self.flux.u_lo}, {self.flux.u_hi}] "
                    f"must contain [{lo:g}, {hi:g}]"
                )
        object.__setattr__(self, "_u0", self._build_initial())

    @property
    def wave_state(self) -> WaveState | None:
        if self.flux is None:
            return None
        return WaveState(self.flux, self.far_field)

    def _build_initial(self):
        init, grid = self.initial, self.grid
        x = grid.centers
        if init.base is BaseState.CONSTANT:
            u = np.full(grid.n_cells, float(init.value))
        elif init.base is BaseState.BARENBLATT:
            params = BarenblattParams(self.visc.p, init.C, self.visc.mu)
            u = barenblatt_field(grid, init.t0, params).values.copy()
        elif self.far_field.is_constant:
            u = np.full(grid.n_cells, float(self.far_field.u_minus))
        elif init.base is BaseState.SMOOTHED_RAREFACTION:
            u = sample_wave(grid, 0.0, self.wave_state, WaveKind.SMOOTHED).values.copy()
        else:
            u = sample_wave(grid, 0.0, self.wave_state, WaveKind.EXACT).values.copy()
        if init.perturbation is not None:
            u = u + init.perturbation(x)
        return u

    def initial_field(self) -> Field:
        return Field(self.grid, self._u0)


@dataclass
class Trajectory:
    times: list
    snapshots: list
    snapshot_dt: list
    log: dict
    steps: int
    max_principle_slack: float
    wall_time: float = 0.0

    def at(self, t) -> Field:
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return self.snapshots[i]


# -- scalar reference fluxes -------------------------------------------------

def numerical_flux(u_left, u_right, flux: FluxModel | None):
    """Rusanov (local Lax-Friedrichs) flux between two states."""
    if flux is None:
        return 0.0
    a = max(abs(float(flux.lam(u_left))), abs(float(flux.lam(u_right))))
    return float(
        0.5 * (flux.f(u_left) + flux.f(u_right)) - 0.5 * a * (u_right - u_left)
    )


def viscous_flux(u_left, u_right, dx, visc: ViscosityParams):
    """Two-point approximation of ``mu |u_x|^{p-1} u_x`` at an interface."""
    if not dx > 0:
        raise ValueError("dx must be positive")
    return visc.mu * signed_pow((u_right - u_left) / dx, visc.p)


# -- compiled kernels ----------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _horner(c, u):
    acc = 0.0
    for k in range(c.shape[0] - 1, -1, -1):
        acc = acc * u + c[k]
    return acc


@numba.njit(cache=True, inline="always")
def _abs_pow(a, e):
    if e == 1.0:
        return a
    if e == 2.0:
        return a * a
    if a == 0.0:
        return 0.0
    return a**e


@numba.njit(cache=True)
def _rhs(u, out, dx, fc, lc, has_flux, p, mu, bc, gl, gr):
    """out = -(H_{j+1/2} - H_{j-1/2})/dx with H = F - G.

    Returns (max |λ|, max |Δu/dx|, H at left edge, H at right edge).
    """
    n = u.shape[0]
    amax = 0.0
    gmax = 0.0
    if bc == 0:
        left_ghost = gl
        right_ghost = gr
    else:
        left_ghost = u[0]
        right_ghost = u[n - 1]
    h_prev = 0.0
    h_left = 0.0
    h_right = 0.0
    pm1 = p - 1.0
    inv_dx = 1.0 / dx
    lam_r = 0.0
    f_r = 0.0
    for i in range(n + 1):
        ul = left_ghost if i == 0 else u[i - 1]
        ur = right_ghost if i == n else u[i]
        h = 0.0
        if has_flux:
            if i == 0:
                lam_l = _horner(lc, ul)
                f_l = _horner(fc, ul)
            else:
                lam_l = lam_r
                f_l = f_r
            lam_r = _horner(lc, ur)
            f_r = _horner(fc, ur)
            a = max(abs(lam_l), abs(lam_r))
            if a > amax:
                amax = a
            h = 0.5 * (f_l + f_r) - 0.5 * a * (ur - ul)
        g = (ur - ul) * inv_dx
        ag = abs(g)
        if ag > gmax:
            gmax = ag
        h -= mu * _abs_pow(ag, pm1) * g
        if i == 0:
            h_left = h
        else:
            out[i - 1] = -(h - h_prev) * inv_dx
        if i == n:
            h_right = h
        h_prev = h
    return amax, gmax, h_left, h_right


@numba.njit(cache=True)
def _inverse_time_scales(amax, gmax, dx, p, mu):
    # 1/dt_conv and 1/dt_diff; the step is cfl / max of the two
    inv_conv = amax / dx
    inv_diff = 0.0
    if gmax > 0.0:
        inv_diff = 2.0 * mu * p * _abs_pow(gmax, p - 1.0) / (dx * dx)
    return inv_conv, inv_diff


@numba.njit(cache=True)
def _advance(u, t, t_target, dx, fc, lc, has_flux, p, mu, cfl, bc, gl, gr,
             log_buf, log_pos, log_every, step_count, dt_floor):
    """Advance ``u`` in place from ``t`` to ``t_target``.

    Status codes: 0 done, 1 non-finite state, 2 dt underflow, 3 log buffer full.
    Returns (t, status, steps, last_dt, slack, log_pos).
    """
    n = u.shape[0]
    k0 = np.empty(n)
    k1 = np.empty(n)
    u1 = np.empty(n)
    slack = 0.0
    last_dt = 0.0
    steps = step_count
    cur_min = u.min()
    cur_max = u.max()
    while t < t_target:
        if log_pos >= log_buf.shape[0]:
            return t, 3, steps, last_dt, slack, log_pos
        amax, gmax, _, _ = _rhs(u, k0, dx, fc, lc, has_flux, p, mu, bc, gl, gr)
        ic, idf = _inverse_time_scales(amax, gmax, dx, p, mu)
        inv = max(ic, idf)
        if inv > 0.0:
            dt_stab = cfl / inv
        else:
            dt_stab = np.inf
        if dt_stab < dt_floor:
            return t, 2, steps, last_dt, slack, log_pos
        gap = t_target - t
        dt = min(dt_stab, gap)
        for _attempt in range(60):
            for j in range(n):
                u1[j] = u[j] + dt * k0[j]
            amax1, gmax1, _, _ = _rhs(u1, k1, dx, fc, lc, has_flux, p, mu, bc, gl, gr)
            ic1, idf1 = _inverse_time_scales(amax1, gmax1, dx, p, mu)
            # stage 2 must remain a monotone forward-Euler step
            if dt * (ic1 + idf1) <= 1.0:
                break
            dt = 0.5 * dt
        landing = dt == gap
        finite = True
        new_min = np.inf
        new_max = -np.inf
        mass = 0.0
        for j in range(n):
            v = 0.5 * u[j] + 0.5 * (u1[j] + dt * k1[j])
            if not np.isfinite(v):
                finite = False
            u[j] = v
            mass += v
            if v < new_min:
                new_min = v
            if v > new_max:
                new_max = v
        if not finite:
            return t, 1, steps, last_dt, slack, log_pos
        if landing:
            t = t_target
        else:
            t = t + dt
        last_dt = dt
        steps += 1
        if cur_min - new_min > slack:
            slack = cur_min - new_min
        if new_max - cur_max > slack:
            slack = new_max - cur_max
        cur_min = new_min
        cur_max = new_max
        if steps % log_every == 0:
            log_buf[log_pos, 0] = t
            log_buf[log_pos, 1] = dt
            log_buf[log_pos, 2] = mass * dx
            log_buf[log_pos, 3] = new_min
            log_buf[log_pos, 4] = new_max
            log_pos += 1
    return t, 0, steps, last_dt, slack, log_pos


# -- Python-facing operations --------------------------------------------------

def _kernel_args(prob: Problem):
    if prob.flux is None:
        fc = np.zeros(1)
        lc = np.zeros(1)
        has_flux = False
    else:
        fc = np.asarray(prob.flux.coefficients, dtype=float)
        lc = fc[1:] * np.arange(1, fc.size)
        has_flux = True
    bc = 0 if prob.boundary is Boundary.DIRICHLET else 1
    return (fc, lc, has_flux, float(prob.visc.p), float(prob.visc.mu), bc,
            float(prob.far_field.u_minus), float(prob.far_field.u_plus))


def stable_dt(state: Field, prob: Problem, t: float | None = None) -> float:
    """Explicit stability bound (convective and degenerate-diffusive).

    ``cfl * min(dx / max|λ(u)|, dx² / (2 mu p max|Δu/dx|^{p-1}))``, each
    term taken as infinite when its denominator vanishes. When ``t`` is
    given, the step is also clamped so as not to overshoot the next
    observation time (or ``t_end``).
    """
    fc, lc, has_flux, p, mu, bc, gl, gr = _kernel_args(prob)
    dx = prob.grid.dx
    out = np.empty(prob.grid.n_cells)
    amax, gmax, _, _ = _rhs(np.ascontiguousarray(state.values, dtype=float), out,
                           dx, fc, lc, has_flux, p, mu, bc, gl, gr)
    ic, idf = _inverse_time_scales(amax, gmax, dx, p, mu)
    inv = max(ic, idf)
    dt = prob.time.cfl / inv if inv > 0 else math.inf
    if dt < DT_FLOOR:
        raise NumericalBlowUp(f"time step underflow (dt={dt:.3e})", t)
    if t is not None:
        upcoming = [s for s in prob.time.observe if s > t] + [prob.time.t_end]
        dt = min(dt, min(upcoming) - t)
    return dt


def step(state: Field, dt: float, prob: Problem) -> Field:
    """One SSP-RK2 step of the conservative update."""
    fc, lc, has_flux, p, mu, bc, gl, gr = _kernel_args(prob)
    dx = prob.grid.dx
    u = np.array(state.values, dtype=float)
    k = np.empty_like(u)
    _rhs(u, k, dx, fc, lc, has_flux, p, mu, bc, gl, gr)
    u1 = u + dt * k
    _rhs(u1, k, dx, fc, lc, has_flux, p, mu, bc, gl, gr)
    u2 = 0.5 * u + 0.5 * (u1 + dt * k)
    if not np.all(np.isfinite(u2)):
        raise NumericalBlowUp("numerical blow-up", None)
    return Field(state.grid, u2)


def boundary_flux(state: Field, prob: Problem):
    """Total interface flux ``F - G`` at the left and right domain edges."""
    fc, lc, has_flux, p, mu, bc, gl, gr = _kernel_args(prob)
    out = np.empty(prob.grid.n_cells)
    _, _, hl, hr = _rhs(np.array(state.values, dtype=float), out, prob.grid.dx,
                        fc, lc, has_flux, p, mu, bc, gl, gr)
    return hl, hr


def run(prob: Problem) -> Trajectory:
    """Integrate from ``t_start`` to ``t_end``, snapshotting at observation times."""
    fc, lc, has_flux, p, mu, bc, gl, gr = _kernel_args(prob)
    tm = prob.time
    dx = prob.grid.dx
    u = np.array(prob.initial_field().values, dtype=float)
    t = float(tm.t_start)
    targets = [s for s in tm.observe if s > t]
    if not targets or targets[-1] < tm.t_end:
        targets.append(float(tm.t_end))

    times, snaps, snap_dt = [], [], []
    if tm.observe and tm.observe[0] == t:
        times.append(t)
        snaps.append(Field(prob.grid, u))
        snap_dt.append(0.0)

    log_buf = np.empty((4096, 5))
    log_pos = 0
    steps = 0
    slack = 0.0
    started = _time.perf_counter()
    for target in targets:
        while True:
            t, status, steps, last_dt, s, log_pos = _advance(
                u, t, float(target), dx, fc, lc, has_flux, p, mu, tm.cfl, bc, gl, gr,
                log_buf, log_pos, tm.log_every, steps, DT_FLOOR)
            slack = max(slack, s)
            if status == 3:
                grown = np.empty((2 * log_buf.shape[0], 5))
                grown[:log_pos] = log_buf[:log_pos]
                log_buf = grown
                continue
            if status == 1:
                raise NumericalBlowUp("numerical blow-up", t)
            if status == 2:
                raise NumericalBlowUp("time step underflow", t)
            break
        if target in tm.observe:
            times.append(t)
            snaps.append(Field(prob.grid, u))
            snap_dt.append(last_dt)
    log = {
        name: log_buf[:log_pos, i].copy()
        for i, name in enumerate(("t", "dt", "mass", "min_u", "max_u"))
    }
    return Trajectory(times, snaps, snap_dt, log, steps, slack,
                      _time.perf_counter() - started)


def run_ensemble(problems) -> list:
    """Advance several problems in lockstep with one shared step sequence.

    All members must share grid and time schedule. Each step uses the
    smallest stable ``dt`` over the members, so the discrete solution
    operator is the same monotone map for all of them; this is what the
    comparison and L¹-contraction properties are stated for.
    """
    problems = list(problems)
    if not problems:
        raise ValueError("empty ensemble")
    grid, tm = problems[0].grid, problems[0].time
    for pr in problems[1:]:
        if pr.grid != grid or pr.time != tm:
            raise ValueError("ensemble members must share grid and time schedule")
    args = [_kernel_args(pr) for pr in problems]
    dx = grid.dx
    us = [np.array(pr.initial_field().values, dtype=float) for pr in problems]
    k = np.empty(grid.n_cells)

    def scales(u, a):
        # (1/dt_conv, 1/dt_diff) for state u under kernel arguments a
        fc, lc, has_flux, p, mu, bc, gl, gr = a
        amax, gmax, _, _ = _rhs(u, k, dx, fc, lc, has_flux, p, mu, bc, gl, gr)
        return _inverse_time_scales(amax, gmax, dx, p, mu)

    t = float(tm.t_start)
    targets = [s for s in tm.observe if s > t]
    if not targets or targets[-1] < tm.t_end:
        targets.append(float(tm.t_end))
    out = [([], [], []) for _ in problems]
    if tm.observe and tm.observe[0] == t:
        for (times, snaps, dts), u in zip(out, us):
            times.append(t)
            snaps.append(Field(grid, u))
            dts.append(0.0)
    steps = 0
    last_dt = 0.0
    slack = [0.0] * len(problems)
    started = _time.perf_counter()
    for target in targets:
        while t < target:
            inv = max(max(scales(u, a)) for u, a in zip(us, args))
            dt = tm.cfl / inv if inv > 0 else math.inf
            if dt < DT_FLOOR:
                raise NumericalBlowUp("time step underflow", t)
            gap = target - t
            dt = min(dt, gap)
            for _ in range(60):
                stage1 = []
                for u, a in zip(us, args):
                    fc, lc, has_flux, p, mu, bc, gl, gr = a
                    k0 = np.empty_like(u)
                    _rhs(u, k0, dx, fc, lc, has_flux, p, mu, bc, gl, gr)
                    stage1.append(u + dt * k0)
                if all(dt * sum(scales(u1, a)) <= 1.0 for u1, a in zip(stage1, args)):
                    break
                dt *= 0.5
            for i, (u1, a) in enumerate(zip(stage1, args)):
                fc, lc, has_flux, p, mu, bc, gl, gr = a
                k1 = np.empty_like(u1)
                _rhs(u1, k1, dx, fc, lc, has_flux, p, mu, bc, gl, gr)
                new = 0.5 * us[i] + 0.5 * (u1 + dt * k1)
                if not np.all(np.isfinite(new)):
                    raise NumericalBlowUp("numerical blow-up", t)
                slack[i] = max(slack[i], us[i].min() - new.min(), new.max() - us[i].max())
                us[i] = new
            t = target if dt == gap else t + dt
            last_dt = dt
            steps += 1
        if target in tm.observe:
            for (times, snaps, dts), u in zip(out, us):
                times.append(t)
                snaps.append(Field(grid, u))
                dts.append(last_dt)
    wall = _time.perf_counter() - started
    empty = {name: np.zeros(0) for name in ("t", "dt", "mass", "min_u", "max_u")}
    return [Trajectory(times, snaps, dts, dict(empty), steps, s, wall)
            for (times, snaps, dts), s in zip(out, slack)]
