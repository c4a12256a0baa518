"""Rarefaction waves: the exact self-similar fan and its smooth approximant.

The smooth approximant is built from the inviscid Burgers solution with
``tanh`` initial data, solved along characteristics, and then mapped back
through ``λ⁻¹``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import Field, FarField, FluxModel, Grid

__all__ = [
    "WaveState",
    "WaveKind",
    "burgers_rarefaction",
    "smoothed_burgers",
    "exact_rarefaction",
    "smoothed_rarefaction_Ur",
    "smoothed_rarefaction_grad",
    "sample_wave",
]

CHAR_RTOL = 1e-11


class WaveKind(str, Enum):
    EXACT = "exact"
    SMOOTHED = "smoothed"


@dataclass(frozen=True)
class WaveState:
    flux: FluxModel
    far_field: FarField

    def __post_init__(self):
        for u in (self.far_field.u_minus, self.far_field.u_plus):
            if not self.flux.u_lo <= u <= self.flux.u_hi:
                raise ValueError(
                    f"far-field state {u} outside the flux admissible interval"
                )

    @property
    def u_minus(self) -> float:
        return self.far_field.u_minus

    @property
    def u_plus(self) -> float:
        return self.far_field.u_plus

    @property
    def lam_minus(self) -> float:
        return float(self.flux.lam(self.u_minus))

    @property
    def lam_plus(self) -> float:
        return float(self.flux.lam(self.u_plus))

    @property
    def is_constant(self) -> bool:
        return self.far_field.is_constant


def burgers_rarefaction(xi, w_minus, w_plus):
    """Self-similar rarefaction of inviscid Burgers, as a function of ``x/t``."""
    if w_minus > w_plus:
        raise ValueError("not a rarefaction configuration")
    out = np.clip(np.asarray(xi, dtype=float), w_minus, w_plus)
    return float(out) if out.ndim == 0 else out


def _w0(x0, w_minus, w_plus):
    return 0.5 * (w_minus + w_plus) + 0.5 * (w_plus - w_minus) * np.tanh(x0)


def smoothed_burgers(t, x, w_minus, w_plus, *, return_derivative=False):
    """Smooth Burgers solution with ``tanh`` data, by characteristics.

    Solves ``x = x0 + w0(x0) t`` for the foot ``x0`` of the characteristic
    through ``(t, x)`` with a bracketed Newton iteration, and returns
    ``(w, x0)`` where ``w = w0(x0)``. Vectorised over ``x``.

    With ``return_derivative`` the spatial derivative
    ``w_x = w0'(x0) / (1 + w0'(x0) t)`` is appended to the result.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if not w_minus < w_plus:
        raise ValueError("not a rarefaction configuration")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    half = 0.5 * (w_plus - w_minus)
    speed = max(abs(w_minus), abs(w_plus))
    lo = x - speed * t - 1.0
    hi = x + speed * t + 1.0
    tol = CHAR_RTOL * np.maximum(1.0, np.abs(x))

    # initial guess: invert the exact fan, then clip into the bracket
    x0 = x - _w0_guess(x, t, w_minus, w_plus)
    for _ in range(200):
        th = np.tanh(x0)
        g = x0 + (0.5 * (w_minus + w_plus) + half * th) * t - x
        conv = np.abs(g) <= 0.25 * tol
        if np.all(conv):
            break
        lo = np.where(g < 0.0, x0, lo)
        hi = np.where(g > 0.0, x0, hi)
        dg = 1.0 + half * (1.0 - th * th) * t
        cand = x0 - g / dg
        bad = (cand <= lo) | (cand >= hi)
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        x0 = np.where(conv, x0, cand)
        if np.all(conv | (hi - lo <= 1e-15 * np.maximum(1.0, np.abs(x0)))):
            break
    w = _w0(x0, w_minus, w_plus)
    if return_derivative:
        th = np.tanh(x0)
        dw0 = half * (1.0 - th * th)
        wx = dw0 / (1.0 + dw0 * t)
        if scalar:
            return float(w[0]), float(x0[0]), float(wx[0])
        return w, x0, wx
    if scalar:
        return float(w[0]), float(x0[0])
    return w, x0


def _w0_guess(x, t, w_minus, w_plus):
    # clip(x/t, w-, w+) * t without dividing by a possibly tiny t
    return np.clip(x, w_minus * t, w_plus * t)


def exact_rarefaction(xi, ws: WaveState):
    """Exact rarefaction ``u^r(x/t)`` connecting ``u_-`` to ``u_+``."""
    xi = np.asarray(xi, dtype=float)
    if ws.is_constant:
        out = np.full_like(xi, ws.u_minus)
    else:
        w = burgers_rarefaction(xi, ws.lam_minus, ws.lam_plus)
        out = np.asarray(ws.flux.lam_inv(w), dtype=float)
        # the flat states are returned exactly, not through λ⁻¹(λ(u±))
        out = np.where(xi <= ws.lam_minus, ws.u_minus, out)
        out = np.where(xi >= ws.lam_plus, ws.u_plus, out)
    return float(out) if out.ndim == 0 else out


def smoothed_rarefaction_Ur(t, x, ws: WaveState):
    """Smooth approximant ``U^r(t, x) = λ⁻¹(w(t, x; λ_-, λ_+))``."""
    if ws.is_constant:
        raise ValueError("degenerate fan; use constant state")
    w, _ = smoothed_burgers(t, x, ws.lam_minus, ws.lam_plus)
    w = np.clip(w, ws.lam_minus, ws.lam_plus)
    out = ws.flux.lam_inv(w)
    return out


def smoothed_rarefaction_grad(t, x, ws: WaveState):
    """Analytic ``∂x U^r`` via the chain rule ``w_x / λ'(U^r)``."""
    if ws.is_constant:
        raise ValueError("degenerate fan; use constant state")
    w, _, wx = smoothed_burgers(t, x, ws.lam_minus, ws.lam_plus, return_derivative=True)
    u = ws.flux.lam_inv(np.clip(w, ws.lam_minus, ws.lam_plus))
    return wx / ws.flux.dlam(u)


def sample_wave(grid: Grid, t: float, ws: WaveState, which=WaveKind.SMOOTHED) -> Field:
    """Sample the exact or smoothed rarefaction at the cell centres of ``grid``."""
    which = WaveKind(which)
    x = grid.centers
    if which is WaveKind.SMOOTHED:
        return Field(grid, smoothed_rarefaction_Ur(t, x, ws))
    if t == 0:
        vals = np.where(x < 0.0, ws.u_minus, ws.u_plus).astype(float)
        left = grid.x_min + np.arange(grid.n_cells) * grid.dx
        straddle = (left < 0.0) & (left + grid.dx > 0.0)
        vals[straddle] = 0.5 * (ws.u_minus + ws.u_plus)
        return Field(grid, vals)
    return Field(grid, exact_rarefaction(x / t, ws))
