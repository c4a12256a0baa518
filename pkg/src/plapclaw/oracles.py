"""Exact self-similar (Barenblatt-type) solutions of the p-Laplacian equation.

For ``u_t = mu (|u_x|^{p-1} u_x)_x`` the ansatz ``u = t^-a F(x t^-a)``
forces ``a = 1/(2p)``, and integrating ``-a xi F = mu |F'|^{p-1} F'`` once
gives the compactly supported profile

    F(xi) = (C - (p-1)/(p+1) (a/mu)^{1/p} |xi|^{(p+1)/p})_+^{p/(p-1)}.

The closed form is only trusted after :func:`barenblatt_residual` confirms
it solves the PDE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Field, Grid, signed_pow

__all__ = [
    "BarenblattParams",
    "barenblatt",
    "barenblatt_profile",
    "barenblatt_field",
    "barenblatt_mass",
    "barenblatt_residual",
]


@dataclass(frozen=True)
class BarenblattParams:
    p: float
    C: float
    mu: float = 1.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if not self.C > 0:
            raise ValueError("Barenblatt constant C must be positive")
        if not self.mu > 0:
            raise ValueError("mu must be positive")

    @property
    def alpha(self) -> float:
        return 1.0 / (2.0 * self.p)

    @property
    def k(self) -> float:
        p = self.p
        return (p - 1.0) / (p + 1.0) * (self.alpha / self.mu) ** (1.0 / p)

    @property
    def xi_max(self) -> float:
        """Half-width of the profile support in the similarity variable."""
        p = self.p
        return (self.C / self.k) ** (p / (p + 1.0))

    @property
    def peak(self) -> float:
        return self.C ** (self.p / (self.p - 1.0))


def barenblatt_profile(xi, params: BarenblattParams):
    p = params.p
    xi = np.abs(np.asarray(xi, dtype=float))
    base = np.maximum(params.C - params.k * xi ** ((p + 1.0) / p), 0.0)
    return base ** (p / (p - 1.0))


def barenblatt(t, x, params: BarenblattParams):
    """Evaluate ``t^-a F(x t^-a)``."""
    if not t > 0:
        raise ValueError("Barenblatt solution needs t > 0")
    scale = t ** (-params.alpha)
    out = scale * barenblatt_profile(np.asarray(x, dtype=float) * scale, params)
    return float(out) if np.ndim(out) == 0 else out


def barenblatt_field(grid: Grid, t: float, params: BarenblattParams) -> Field:
    return Field(grid, barenblatt(t, grid.centers, params))


def barenblatt_mass(params: BarenblattParams) -> float:
    """Closed-form ``∫ F dξ`` (time independent) via the Beta function."""
    from scipy.special import beta

    p = params.p
    s = (p + 1.0) / p
    e = p / (p - 1.0)
    # ∫_0^ξmax (C - k ξ^s)^e dξ = C^e ξmax / s * B(1/s, e+1)
    return 2.0 * params.C**e * params.xi_max / s * beta(1.0 / s, e + 1.0)


def _d1(fun, x, h):
    # fourth-order central first derivative
    return (fun(x - 2 * h) - 8 * fun(x - h) + 8 * fun(x + h) - fun(x + 2 * h)) / (12 * h)


def barenblatt_residual(params: BarenblattParams, n_samples: int = 2000,
                        interior: float = 0.9) -> float:
    """Normalised PDE residual of the closed-form solution.

    Samples ``(t, x)`` on ``t in [1, 4]`` and ``|x| <= interior * support``,
    forms ``u_t - mu (|u_x|^{p-1} u_x)_x`` with nested fourth-order central
    differences, and returns its maximum divided by ``max |u_t|``.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    p, mu = params.p, params.mu
    n_t = 10
    n_x = int(np.ceil(n_samples / n_t))
    ts = np.linspace(1.0, 4.0, n_t)
    worst = 0.0
    scale = 0.0
    for t in ts:
        half = params.xi_max * t**params.alpha
        x = np.linspace(-interior * half, interior * half, n_x)
        ht = 1e-3 * t
        hx_in = 1e-4 * half
        hx_out = 1e-3 * half

        def u_of_x(y, t=t):
            return barenblatt(t, y, params)

        def flux(y):
            return mu * signed_pow(_d1(u_of_x, y, hx_in), p)

        u_t = _d1(lambda s: barenblatt(s, x, params), t, ht)
        div = _d1(flux, x, hx_out)
        worst = max(worst, float(np.max(np.abs(u_t - div))))
        scale = max(scale, float(np.max(np.abs(u_t))))
    return worst / scale
