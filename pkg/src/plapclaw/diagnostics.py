"""Norms, energy integrands, the explicit interpolation inequality and
power-law decay fits.

All integrals use the midpoint rule on the cell-centred grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from enum import Enum

import numpy as np
from scipy import stats

from .model import Field, ViscosityParams
from .waves import WaveKind, WaveState, sample_wave, smoothed_rarefaction_grad

__all__ = [
    "lq_norm",
    "discrete_gradient",
    "second_difference",
    "Asymptote",
    "deviation",
    "EnergyReport",
    "energy_report",
    "interpolation_check",
    "DecayFit",
    "decay_fit",
    "reference_exponent",
    "GRADIENT_BRANCH_POINT",
    "THEOREMS",
]

# below this p the faster gradient rates apply for rarefaction asymptotics
GRADIENT_BRANCH_POINT = (2.0 + math.sqrt(22.0)) / 6.0

THEOREMS = ("Thm1.1", "Thm1.2", "Thm1.3", "Thm1.4", "Thm1.5", "Thm1.6",
            "Thm7.1", "Thm7.2", "Thm7.3")


def _parse_q(q):
    if isinstance(q, str):
        if q.lower() in ("inf", "infinity", "∞"):
            return math.inf
        q = float(q)
    q = float(q)
    if not q >= 1:
        raise ValueError("q must be >= 1")
    return q


def lq_norm(field: Field, q) -> float:
    """Midpoint-rule ``L^q`` norm; ``q`` may be ``inf`` (or ``"inf"``)."""
    q = _parse_q(q)
    v = np.abs(np.asarray(field.values if isinstance(field, Field) else field))
    if q == math.inf:
        return float(v.max()) if v.size else 0.0
    dx = field.grid.dx
    m = v.max()
    if m == 0.0:
        return 0.0
    # scale out the max to avoid under/overflow for large q
    return float(m * (np.sum((v / m) ** q) * dx) ** (1.0 / q))


def discrete_gradient(field: Field) -> Field:
    """Centred differences inside, one-sided at the two edges."""
    if field.grid.n_cells < 3:
        raise ValueError("discrete gradient needs at least 3 cells")
    return Field(field.grid, np.gradient(field.values, field.grid.dx))


def second_difference(field: Field) -> Field:
    v = field.values
    d2 = np.empty_like(v)
    d2[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / field.grid.dx**2
    d2[0] = d2[1]
    d2[-1] = d2[-2]
    return Field(field.grid, d2)


class Asymptote(str, Enum):
    EXACT = "exact"
    SMOOTHED = "smoothed"
    CONSTANT = "constant"


def asymptotic_state(grid, t, ws: WaveState | None, which, constant=0.0) -> Field:
    which = Asymptote(which)
    if which is Asymptote.CONSTANT or ws is None:
        value = constant if ws is None else ws.u_minus
        return Field(grid, np.full(grid.n_cells, float(value)))
    if ws.is_constant:
        return Field(grid, np.full(grid.n_cells, ws.u_minus))
    kind = WaveKind.EXACT if which is Asymptote.EXACT else WaveKind.SMOOTHED
    return sample_wave(grid, t, ws, kind)


def deviation(u: Field, t: float, ws: WaveState | None, which=Asymptote.SMOOTHED,
              constant: float = 0.0) -> Field:
    """``φ = u - (asymptotic state)`` sampled on the grid of ``u``.

    With ``ws=None`` (no flux) the reference is the constant ``constant``.
    """
    return u - asymptotic_state(u.grid, t, ws, which, constant)


def _ur_gradient(grid, t, ws):
    if ws is None or ws.is_constant:
        return np.zeros(grid.n_cells)
    return smoothed_rarefaction_grad(t, grid.centers, ws)


@dataclass(frozen=True)
class EnergyReport:
    """Instantaneous integrands of the weighted ``L^q`` and gradient energies.

    ``dissipation`` is ``None`` when ``q < 2`` (the ``|φ|^{q-2}`` weight is
    singular there). ``phi_lp_p`` carries ``‖φ‖_{L^p}^p`` next to
    ``phi_lq_q`` since both appear in the weighted estimate.
    """

    t: float
    alpha: float
    q: float
    weighted_lq: float
    fan_term: float
    dissipation: float | None
    grad_energy: float
    grad_dissipation: float
    phi_lq_q: float
    phi_lp_p: float

    def as_dict(self):
        return asdict(self)


def energy_report(u: Field, t: float, alpha: float, q: float, ws: WaveState | None,
                  visc: ViscosityParams, which=Asymptote.SMOOTHED,
                  constant: float = 0.0) -> EnergyReport:
    q = _parse_q(q)
    if q == math.inf:
        raise ValueError("energy report needs finite q")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    p = visc.p
    dx = u.grid.dx
    phi = deviation(u, t, ws, which, constant)
    ap = np.abs(phi.values)
    dphi = discrete_gradient(phi).values
    dur = _ur_gradient(u.grid, t, ws)
    du = discrete_gradient(u).values
    d2u = second_difference(u).values

    phi_lq_q = float(np.sum(ap**q) * dx)
    fan = float(np.sum(ap**q * dur) * dx)
    if q >= 2:
        weight = ap ** (q - 2.0) if q > 2 else np.ones_like(ap)
        integrand = weight * dphi**2 * (np.abs(dphi) ** (p - 1) + np.abs(dur) ** (p - 1))
        dissipation = float(np.sum(integrand) * dx)
    else:
        dissipation = None
    grad_energy = float(np.sum(np.abs(du) ** (p + 1)) * dx)
    grad_diss = float(np.sum(np.abs(du) ** (2 * (p - 1)) * d2u**2) * dx)
    return EnergyReport(
        t=float(t), alpha=float(alpha), q=q,
        weighted_lq=(1.0 + t) ** alpha * phi_lq_q,
        fan_term=fan,
        dissipation=dissipation,
        grad_energy=grad_energy,
        grad_dissipation=grad_diss,
        phi_lq_q=phi_lq_q,
        phi_lp_p=float(np.sum(ap**p) * dx),
    )


def interpolation_check(phi: Field, p: float, q: float):
    """Sup-norm interpolation bound with its explicit constant.

    Returns ``(lhs, rhs, ratio)`` with
    ``lhs = ‖φ‖_∞^s``, ``s = (3p+q-1)/(p+1)`` and
    ``rhs = s (∫φ²)^{p/(p+1)} (∫|φ|^{q-2}|φ_x|^{p+1})^{1/(p+1)}``.
    """
    if not p > 1:
        raise ValueError("p must exceed 1")
    if not q >= 2:
        raise ValueError("interpolation check needs q >= 2")
    v = phi.values
    sup = float(np.max(np.abs(v)))
    if sup == 0.0:
        return 0.0, 0.0, 0.0
    if max(abs(v[0]), abs(v[-1])) >= 1e-8 * sup:
        raise ValueError("interpolation check requires decaying field")
    dx = phi.grid.dx
    s = (3.0 * p + q - 1.0) / (p + 1.0)
    dphi = discrete_gradient(phi).values
    weight = np.abs(v) ** (q - 2.0) if q > 2 else np.ones_like(v)
    l2sq = float(np.sum(v * v) * dx)
    grad_term = float(np.sum(weight * np.abs(dphi) ** (p + 1.0)) * dx)
    lhs = sup**s
    rhs = s * l2sq ** (p / (p + 1.0)) * grad_term ** (1.0 / (p + 1.0))
    ratio = lhs / rhs if rhs > 0 else math.inf
    return lhs, rhs, ratio


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    intercept: float
    r_squared: float
    window: tuple
    reference_exponent: float
    tolerance: float
    passed: bool
    n_samples: int
    residuals: tuple = ()

    def as_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        d["residuals"] = list(self.residuals)
        return d


def decay_fit(times, values, reference_exponent: float, window=None,
              tolerance: float = 0.15, two_sided: bool = False) -> DecayFit:
    """Least-squares slope of ``log(value)`` against ``log(1 + t)``.

    Rates from the theory are upper bounds, so by default the fit passes
    when ``exponent <= reference + tolerance``; ``two_sided`` also demands
    ``exponent >= reference - tolerance``.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is None:
        window = (t.max() / 10.0, t.max())
    t_lo, t_hi = float(window[0]), float(window[1])
    if not t_lo < t_hi:
        raise ValueError("fit window must satisfy t_lo < t_hi")
    sel = (t >= t_lo * (1 - 1e-12)) & (t <= t_hi * (1 + 1e-12))
    if sel.sum() < 5:
        raise ValueError(f"decay fit needs >= 5 samples in window, got {int(sel.sum())}")
    if np.any(v[sel] <= 0):
        raise ValueError("decay fit needs positive values in the window")
    lx = np.log1p(t[sel])
    ly = np.log(v[sel])
    res = stats.linregress(lx, ly)
    resid = ly - (res.intercept + res.slope * lx)
    ok = res.slope <= reference_exponent + tolerance
    if two_sided:
        ok = ok and res.slope >= reference_exponent - tolerance
    r2 = res.rvalue**2 if np.ptp(ly) > 0 else 1.0
    return DecayFit(
        exponent=float(res.slope), intercept=float(res.intercept),
        r_squared=float(r2), window=(t_lo, t_hi),
        reference_exponent=float(reference_exponent), tolerance=float(tolerance),
        passed=bool(ok), n_samples=int(sel.sum()),
        residuals=tuple(float(r) for r in resid),
    )


def reference_exponent(theorem: str, p: float, q=None, r=None, quantity="lq") -> float:
    """Decay exponent asserted by a theorem (ε-free limit of ε-loss rates).

    ``quantity="lq"`` selects the ``L^q`` rate of the deviation; ``"grad"``
    the rate of ``‖∂x u‖`` in ``L^{p+1}`` (or ``L^{r+1}`` for the
    ``r > p`` theorems).
    """
    # + 0.0 turns the -0.0 produced at q = 1 into 0.0
    return float(_reference_exponent(theorem, p, q, r, quantity)) + 0.0


def _reference_exponent(theorem, p, q, r, quantity):
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem selector {theorem!r}")
    if not p > 1:
        raise ValueError("p must exceed 1")
    if quantity == "lq":
        q = _parse_q(q)
        if theorem in ("Thm1.1", "Thm1.4", "Thm7.1"):
            if q < 2:
                raise ValueError(f"{theorem} covers q >= 2 only")
            if q == math.inf:
                return -1.0 / (3 * p + 1)
            return -(1.0 / (3 * p + 1)) * (1.0 - 2.0 / q)
        if theorem in ("Thm1.2", "Thm1.5", "Thm7.2"):
            if q == math.inf:
                return -1.0 / (2 * p)
            return -(1.0 / (2 * p)) * (1.0 - 1.0 / q)
        raise ValueError(f"{theorem} has no L^q rate")
    if quantity != "grad":
        raise ValueError(f"unknown quantity {quantity!r}")
    slow = -3.0 / (2 * (p + 1) * (3 * p - 2))
    if theorem == "Thm1.2":
        return slow
    if theorem == "Thm1.5":
        return -p / (p + 1) if p < GRADIENT_BRANCH_POINT else slow
    if theorem == "Thm7.2":
        return -(2 * p + 1) / (2 * p * (p + 1))
    if r is None or not r > p:
        raise ValueError(f"{theorem} needs r > p")
    slow_r = -(p + 2 * r) / (2 * p * (3 * p - 2) * (r + 1))
    if theorem == "Thm1.3":
        return slow_r
    if theorem == "Thm1.6":
        if p < GRADIENT_BRANCH_POINT:
            return -(2 * p * r + p * p + r) / ((3 * p + 1) * (r + 1))
        return slow_r
    if theorem == "Thm7.3":
        return -(6 * p * r + 3 * p + 2 * r + 1) / (2 * p * (3 * p + 1) * (r + 1))
    raise ValueError(f"{theorem} has no gradient rate")
