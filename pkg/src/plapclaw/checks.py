"""Self-checks run by ``plap-claw oracle``.

Each suite yields :class:`Check` records; a suite never raises, a broken
precondition is reported as a failed check instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import decay_fit, discrete_gradient, interpolation_check, lq_norm
from .model import FarField, Field, FluxModel, Grid, split_identity_residual
from .oracles import BarenblattParams, barenblatt_residual
from .waves import (
    WaveState,
    exact_rarefaction,
    sample_wave,
    smoothed_burgers,
)

SUITES = ("2.1", "2.2", "4.2", "identity", "barenblatt")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _guard(name, fn):
    try:
        return fn()
    except Exception as exc:  # reported, not raised
        return [Check(name, False, f"error: {exc}")]


def burgers_approximant_checks(q_values=(1.0, 2.0, math.inf)):
    """Bounds, monotonicity, characteristic residual and w_x decay."""
    out = []
    wm, wp = -1.0, 1.0
    ok_bounds = ok_mono = True
    worst_res = 0.0
    for t in (0.0, 1.0, 10.0, 100.0, 1000.0):
        x = np.linspace(wm * t - 15, wp * t + 15, 4001)
        w, x0 = smoothed_burgers(t, x, wm, wp)
        ok_bounds &= bool(np.all((w > wm) & (w < wp)))
        ok_mono &= bool(np.all(np.diff(w) > 0))
        resid = np.abs(x - x0 - w * t) / np.maximum(1.0, np.abs(x))
        worst_res = max(worst_res, float(resid.max()))
    out.append(Check("smoothed Burgers bounds w- < w < w+", ok_bounds, "t in {0,1,10,100,1000}"))
    out.append(Check("smoothed Burgers strictly increasing", ok_mono, "t in {0,1,10,100,1000}"))
    out.append(Check("characteristic residual <= 1e-11 max(1,|x|)", worst_res <= 1e-11,
                     f"worst {worst_res:.2e}"))
    ts = np.geomspace(1.0, 1000.0, 13)
    for q in q_values:
        vals = []
        for t in ts:
            g = Grid(wm * t - 30, wp * t + 30, 20000)
            _, _, wx = smoothed_burgers(t, g.centers, wm, wp, return_derivative=True)
            vals.append(lq_norm(Field(g, wx), q))
        ref = 1.0 / q - 1.0
        fit = decay_fit(ts, vals, ref, (1.0, 1000.0), 0.1, two_sided=True)
        out.append(Check(f"||w_x||_L{_qname(q)} decay", fit.passed,
                         f"fitted {fit.exponent:+.4f}, reference {ref:+.4f}"))
    return out


def _qname(q):
    return "inf" if q == math.inf else f"{q:g}"


def rarefaction_checks(q_values=(1.0, 2.0, math.inf)):
    """Properties of the smoothed rarefaction for a Burgers and a quartic flux."""
    out = []
    cases = [
        ("burgers", WaveState(FluxModel.burgers(), FarField(-1.0, 1.0))),
        ("u^2/2+u^4/4", WaveState(FluxModel.poly((0, 0, 0.5, 0, 0.25), -5, 5),
                                  FarField(-1.0, 1.0))),
    ]
    ts = np.geomspace(1.0, 1000.0, 13)
    for label, ws in cases:
        lm, lp = ws.lam_minus, ws.lam_plus
        ok_bounds = ok_mono = True
        for t in (0.0, 1.0, 10.0, 100.0, 1000.0):
            g = Grid(lm * t - 15, lp * t + 15, 8000)
            v = sample_wave(g, t, ws, "smoothed").values
            ok_bounds &= bool(np.all((v > ws.u_minus) & (v < ws.u_plus)))
            ok_mono &= bool(np.all(np.diff(v) > 0))
        out.append(Check(f"[{label}] u- < U^r < u+", ok_bounds, "fan +/- 15"))
        out.append(Check(f"[{label}] U^r strictly increasing", ok_mono, "fan +/- 15"))

        sup = []
        for t in (1.0, 10.0, 100.0, 1000.0):
            g = Grid(lm * t - 30, lp * t + 30, 20000)
            diff = sample_wave(g, t, ws, "smoothed").values - exact_rarefaction(g.centers / t, ws)
            sup.append(float(np.max(np.abs(diff))))
        mono = all(b <= a for a, b in zip(sup, sup[1:]))
        out.append(Check(f"[{label}] sup|U^r - u^r| nonincreasing", mono,
                         ", ".join(f"{s:.3e}" for s in sup)))

        for q in q_values:
            vals = []
            for t in ts:
                g = Grid(lm * t - 30, lp * t + 30, 20000)
                vals.append(lq_norm(discrete_gradient(sample_wave(g, t, ws, "smoothed")), q))
            ref = 1.0 / q - 1.0
            fit = decay_fit(ts, vals, ref, (1.0, 1000.0), 0.1, two_sided=True)
            out.append(Check(f"[{label}] ||dU^r/dx||_L{_qname(q)} decay", fit.passed,
                             f"fitted {fit.exponent:+.4f}, reference {ref:+.4f}"))
    return out


def identity_checks(p=None, n_cases=2000, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=3.0, size=n_cases)
    b = rng.normal(scale=3.0, size=n_cases)
    ps = np.full(n_cases, float(p)) if p is not None else rng.uniform(1.0001, 4.0, n_cases)
    worst = 0.0
    for ai, bi, pi in zip(a, b, ps):
        scale = max(abs(ai), abs(bi)) ** (pi + 1)
        r = abs(split_identity_residual(ai, bi, pi))
        worst = max(worst, r / scale if scale > 0 else r)
    return [Check("signed-power splitting identity", worst <= 1e-10,
                  f"{n_cases} cases, worst relative residual {worst:.2e}")]


def interpolation_checks(p=None, q=None, n_cases=1000, seed=1):
    rng = np.random.default_rng(seed)
    grid = Grid(-20.0, 20.0, 2000)
    x = grid.centers
    worst = 0.0
    for _ in range(n_cases):
        pi = float(p) if p is not None else rng.uniform(1.1, 4.0)
        qi = float(q) if q is not None else rng.uniform(2.0, 6.0)
        k = rng.integers(1, 4)
        v = np.zeros_like(x)
        for _ in range(k):
            c, w, a = rng.uniform(-5, 5), rng.uniform(0.3, 2.0), rng.normal()
            v += a * np.exp(-((x - c) / w) ** 2)
        _, _, ratio = interpolation_check(Field(grid, v), pi, qi)
        worst = max(worst, ratio)
    return [Check("interpolation inequality with explicit constant", worst <= 1.05,
                  f"{n_cases} random fields, worst ratio {worst:.4f}")]


def barenblatt_checks(p=None, C=1.0):
    out = []
    for pi in ((p,) if p is not None else (1.5, 2.0, 3.0)):
        try:
            res = barenblatt_residual(BarenblattParams(pi, C), 2000)
        except ValueError as exc:
            out.append(Check(f"Barenblatt residual p={pi:g}", False, str(exc)))
            continue
        out.append(Check(f"Barenblatt residual p={pi:g}, C={C:g}", res <= 1e-3,
                         f"normalised residual {res:.2e}"))
    return out


def run_suites(lemma=None, p=None, q=None, C=1.0):
    """Run the selected suite (all when ``lemma`` is None)."""
    qs = (1.0, 2.0, math.inf) if q is None else (q,)
    suites = {
        "2.1": lambda: burgers_approximant_checks(qs),
        "2.2": lambda: rarefaction_checks(qs),
        "4.2": lambda: interpolation_checks(p, q if q is not None and q >= 2 else None),
        "identity": lambda: identity_checks(p),
        "barenblatt": lambda: barenblatt_checks(p, C),
    }
    if lemma is not None and lemma not in suites:
        raise ValueError(f"unknown suite {lemma!r}; choose from {', '.join(SUITES)}")
    chosen = [lemma] if lemma is not None else list(SUITES)
    checks = []
    for name in chosen:
        checks.extend(_guard(name, suites[name]))
    return checks
