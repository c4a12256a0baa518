"""Core domain types: fluxes, viscosity parameters, grids and grid functions.

Every object here is immutable once built; numpy arrays carried by a
:class:`Field` are flagged read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from numpy.polynomial import Polynomial

__all__ = [
    "FluxModel",
    "ViscosityParams",
    "Grid",
    "Field",
    "FarField",
    "signed_pow",
    "split_identity_residual",
    "lambda_inverse",
]

LAMBDA_INV_TOL = 1e-12


def signed_pow(a, p):
    """Return ``|a|**(p-1) * a``, the odd power used by the viscous flux.

    Works on scalars and arrays alike.
    """
    a_arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a_arr)):
        raise ValueError("non-finite input")
    if p == 2.0:
        out = np.abs(a_arr) * a_arr
    else:
        out = np.abs(a_arr) ** (p - 1.0) * a_arr
    if out.ndim == 0:
        return float(out)
    return out


def split_identity_residual(a, b, p):
    """LHS minus RHS of the symmetric splitting

        (|a|^{p-1}a - |b|^{p-1}b)(a-b)
            = 1/2 (|a|^{p-1} + |b|^{p-1})(a-b)^2
              + 1/2 (|a|^{p-1} - |b|^{p-1})(a^2-b^2)

    which holds for every real a, b and p > 1. Broadcasts over all three.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p <= 1):
        raise ValueError("p must exceed 1")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite input")
    pa = np.abs(a) ** (p - 1.0)
    pb = np.abs(b) ** (p - 1.0)
    lhs = (pa * a - pb * b) * (a - b)
    rhs = 0.5 * (pa + pb) * (a - b) ** 2 + 0.5 * (pa - pb) * (a * a - b * b)
    res = lhs - rhs
    return float(res) if res.ndim == 0 else res


@dataclass(frozen=True)
class FluxModel:
    """Convex flux ``f(u) = sum_k c_k u^k`` with ``f(0) = f'(0) = 0``.

    ``coefficients`` are ascending powers of ``u``. Strict convexity is
    required (and checked) only on the admissible interval
    ``[u_lo, u_hi]``; solutions never leave it thanks to the maximum
    principle.
    """

    kind: str
    coefficients: tuple
    u_lo: float = -10.0
    u_hi: float = 10.0
    _f: Polynomial = dc_field(init=False, repr=False, compare=False)
    _lam: Polynomial = dc_field(init=False, repr=False, compare=False)
    _dlam: Polynomial = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("burgers", "poly"):
            raise ValueError(f"unknown flux kind {self.kind!r}")
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(coeffs) < 3:
            raise ValueError("flux polynomial must be at least quadratic")
        if coeffs[0] != 0.0 or coeffs[1] != 0.0:
            raise ValueError("flux must satisfy f(0) = f'(0) = 0")
        if not self.u_lo < self.u_hi:
            raise ValueError("admissible interval must satisfy u_lo < u_hi")
        object.__setattr__(self, "coefficients", coeffs)
        f = Polynomial(coeffs)
        object.__setattr__(self, "_f", f)
        object.__setattr__(self, "_lam", f.deriv())
        object.__setattr__(self, "_dlam", f.deriv(2))
        samples = np.linspace(self.u_lo, self.u_hi, 10_000)
        if np.any(self._dlam(samples) <= 0.0):
            raise ValueError(
                "flux is not strictly convex on the admissible interval "
                f"[{self.u_lo}, {self.u_hi}]"
            )

    @classmethod
    def burgers(cls, u_lo=-10.0, u_hi=10.0):
        return cls("burgers", (0.0, 0.0, 0.5), u_lo, u_hi)

    @classmethod
    def poly(cls, coefficients, u_lo=-10.0, u_hi=10.0):
        return cls("poly", tuple(coefficients), u_lo, u_hi)

    def f(self, u):
        return self._f(u)

    def lam(self, u):
        return self._lam(u)

    def dlam(self, u):
        return self._dlam(u)

    @property
    def lam_range(self):
        return float(self._lam(self.u_lo)), float(self._lam(self.u_hi))

    def lam_inv(self, y):
        """Vectorised inverse of ``lam`` on the admissible interval."""
        y = np.asarray(y, dtype=float)
        lo_val, hi_val = self.lam_range
        if np.any(y < lo_val) or np.any(y > hi_val) or not np.all(np.isfinite(y)):
            raise ValueError("value outside λ range")
        if self.kind == "burgers":
            out = y.copy()
        else:
            out = _safeguarded_newton(self._lam, self._dlam, y, self.u_lo, self.u_hi)
        return float(out) if out.ndim == 0 else out

    def to_dict(self):
        return {
            "kind": self.kind,
            "coefficients": list(self.coefficients),
            "u_lo": self.u_lo,
            "u_hi": self.u_hi,
        }


def _safeguarded_newton(g, dg, y, lo, hi, tol=LAMBDA_INV_TOL, max_iter=200):
    # g increasing on [lo, hi]; solve g(u) = y elementwise.
    shape = np.shape(y)
    y = np.atleast_1d(y).astype(float)
    a = np.full_like(y, lo)
    b = np.full_like(y, hi)
    u = np.clip(y, lo, hi)
    for _ in range(max_iter):
        r = g(u) - y
        done = np.abs(r) <= tol
        if np.all(done):
            break
        a = np.where(r < 0.0, u, a)
        b = np.where(r > 0.0, u, b)
        d = dg(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = u - r / d
        bad = ~np.isfinite(cand) | (cand <= a) | (cand >= b)
        cand = np.where(bad, 0.5 * (a + b), cand)
        u = np.where(done, u, cand)
        if np.all((b - a) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(u))):
            break
    return u.reshape(shape)


def lambda_inverse(flux: FluxModel, y: float) -> float:
    """Return the unique ``u`` in the admissible interval with ``λ(u) = y``."""
    return flux.lam_inv(y)


@dataclass(frozen=True)
class ViscosityParams:
    p: float
    mu: float = 1.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if not self.mu > 0:
            raise ValueError("mu must be positive")


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid on ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("grid requires x_min < x_max")
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ValueError("grid requires n_cells >= 2")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


@dataclass(frozen=True, eq=False)
class Field:
    """Cell-centred samples of a function of ``x`` on ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_cells,):
            raise ValueError(
                f"field has {v.size} values, grid has {self.grid.n_cells} cells"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.centers

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.dx)

    def __add__(self, other):
        return Field(self.grid, self.values + _values_of(other, self.grid))

    def __sub__(self, other):
        return Field(self.grid, self.values - _values_of(other, self.grid))

    def __mul__(self, c):
        return Field(self.grid, self.values * float(c))

    __rmul__ = __mul__


def _values_of(other, grid):
    if isinstance(other, Field):
        if other.grid != grid:
            raise ValueError("fields live on different grids")
        return other.values
    return other


@dataclass(frozen=True)
class FarField:
    u_minus: float
    u_plus: float

    def __post_init__(self):
        if not (math.isfinite(self.u_minus) and math.isfinite(self.u_plus)):
            raise ValueError("far-field states must be finite")
        if self.u_minus > self.u_plus:
            raise ValueError("far-field states must satisfy u_minus <= u_plus")

    @property
    def is_constant(self) -> bool:
        return self.u_minus == self.u_plus

    def lambdas(self, flux: FluxModel):
        return float(flux.lam(self.u_minus)), float(flux.lam(self.u_plus))
