import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plapclaw import (
    FarField,
    Field,
    FluxModel,
    Grid,
    ViscosityParams,
    lambda_inverse,
    signed_pow,
    split_identity_residual,
)

# root of u + u^3 = 1 by 40-digit bisection (mpmath)
LAMBDA_INV_AT_1 = 0.6823278038280193


@pytest.mark.parametrize("a, p, expected", [(2.0, 2.0, 4.0), (-2.0, 2.0, -4.0), (0.0, 1.5, 0.0),
                                            (4.0, 1.5, 8.0), (-8.0, 3.0, -512.0)])
def test_signed_pow_examples(a, p, expected):
    assert signed_pow(a, p) == expected


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_signed_pow_rejects_non_finite(bad):
    with pytest.raises(ValueError, match="non-finite input"):
        signed_pow(bad, 2.0)


@given(st.floats(-1e6, 1e6, allow_nan=False), st.floats(1.0001, 4.0))
def test_signed_pow_is_exactly_odd(a, p):
    assert signed_pow(-a, p) == -signed_pow(a, p)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(1.0001, 4.0))
def test_signed_pow_is_monotone(a, b, p):
    lo, hi = min(a, b), max(a, b)
    assert signed_pow(lo, p) <= signed_pow(hi, p)


def test_signed_pow_vectorised():
    a = np.array([-2.0, 0.0, 3.0])
    np.testing.assert_array_equal(signed_pow(a, 2.0), [-4.0, 0.0, 9.0])


@pytest.mark.parametrize("a, b, p", [(1.0, 0.0, 2.0), (0.7, 0.7, 3.3), (-2.0, -2.0, 1.5)])
def test_identity_trivial_cases(a, b, p):
    assert split_identity_residual(a, b, p) == 0.0


def test_identity_against_extended_precision():
    mp.mp.dps = 50
    a, b, p = mp.mpf("1.7"), mp.mpf("-0.3"), mp.mpf("2.5")
    pa, pb = abs(a) ** (p - 1), abs(b) ** (p - 1)
    lhs = float((pa * a - pb * b) * (a - b))
    assert abs(split_identity_residual(1.7, -0.3, 2.5)) <= 1e-12 * lhs


@settings(max_examples=1000)
@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(1.0001, 4.0))
def test_identity_residual_is_relatively_small(a, b, p):
    scale = max(abs(a), abs(b)) ** (p + 1)
    r = abs(split_identity_residual(a, b, p))
    assert r <= 1e-10 * scale or r == 0.0


def test_identity_rejects_small_p():
    with pytest.raises(ValueError):
        split_identity_residual(1.0, 2.0, 1.0)


def test_lambda_inverse_examples(quartic):
    assert lambda_inverse(FluxModel.burgers(), 0.5) == 0.5
    assert lambda_inverse(quartic, 2.0) == pytest.approx(1.0, abs=1e-12)
    assert lambda_inverse(quartic, 1.0) == pytest.approx(LAMBDA_INV_AT_1, abs=1e-12)


def test_lambda_inverse_out_of_range(quartic):
    lo, hi = quartic.lam_range
    with pytest.raises(ValueError, match="value outside λ range"):
        lambda_inverse(quartic, hi + 1.0)
    with pytest.raises(ValueError, match="value outside λ range"):
        lambda_inverse(FluxModel.burgers(), -11.0)


def test_lambda_inverse_round_trip(quartic):
    u = np.linspace(quartic.u_lo, quartic.u_hi, 20001)
    back = quartic.lam_inv(quartic.lam(u))
    assert np.max(np.abs(back - u)) <= 1e-10


def test_lambda_inverse_keeps_shape(quartic):
    assert np.shape(quartic.lam_inv(np.array([1.0]))) == (1,)
    assert isinstance(quartic.lam_inv(2.0), float)


def test_flux_values(quartic):
    assert quartic.f(0.0) == 0.0 and quartic.lam(0.0) == 0.0
    assert quartic.f(1.0) == pytest.approx(0.75)
    assert quartic.lam(1.0) == pytest.approx(2.0)
    assert quartic.dlam(1.0) == pytest.approx(4.0)


@pytest.mark.parametrize("coeffs, msg", [
    ((1.0, 0.0, 0.5), "f\\(0\\) = f'\\(0\\) = 0"),
    ((0.0, 0.3, 0.5), "f\\(0\\) = f'\\(0\\) = 0"),
    ((0.0, 0.0, 0.5, 1.0), "not strictly convex"),   # λ' = 1 + 6u < 0 for u < -1/6
    ((0.0, 0.0, -0.5), "not strictly convex"),
    ((0.0, 0.0), "at least quadratic"),
])
def test_flux_rejections(coeffs, msg):
    with pytest.raises(ValueError, match=msg):
        FluxModel.poly(coeffs, -2.0, 2.0)


def test_cubic_flux_accepted_on_narrow_interval():
    f = FluxModel.poly((0.0, 0.0, 0.5, 1.0), -0.1, 2.0)
    assert f.dlam(-0.1) > 0


@pytest.mark.parametrize("p, mu", [(1.0, 1.0), (0.5, 1.0), (2.0, 0.0), (2.0, -1.0)])
def test_viscosity_params_invalid(p, mu):
    with pytest.raises(ValueError):
        ViscosityParams(p, mu)


def test_grid_geometry():
    g = Grid(-1.0, 1.0, 4)
    assert g.dx == 0.5
    np.testing.assert_allclose(g.centers, [-0.75, -0.25, 0.25, 0.75])
    for bad in ((1.0, 0.0, 4), (0.0, 1.0, 1), (0.0, 1.0, 2.5)):
        with pytest.raises(ValueError):
            Grid(*bad)


def test_field_invariants():
    g = Grid(0.0, 1.0, 4)
    f = Field(g, [1.0, 2.0, 3.0, 4.0])
    assert f.integral() == pytest.approx(2.5)
    with pytest.raises(ValueError):
        f.values[0] = 0.0
    with pytest.raises(ValueError, match="finite"):
        Field(g, [1.0, np.nan, 0.0, 0.0])
    with pytest.raises(ValueError):
        Field(g, [1.0, 2.0])
    with pytest.raises(ValueError, match="different grids"):
        f - Field(Grid(0.0, 2.0, 4), np.zeros(4))
    np.testing.assert_array_equal((2 * f - f).values, f.values)


def test_far_field():
    ff = FarField(-1.0, 1.0)
    assert ff.lambdas(FluxModel.burgers()) == (-1.0, 1.0)
    assert FarField(0.3, 0.3).is_constant
    with pytest.raises(ValueError):
        FarField(1.0, -1.0)
