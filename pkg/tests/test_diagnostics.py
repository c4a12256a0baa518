import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from plapclaw import (
    FarField,
    Field,
    FluxModel,
    Grid,
    ViscosityParams,
    WaveState,
    decay_fit,
    deviation,
    discrete_gradient,
    energy_report,
    interpolation_check,
    lq_norm,
    reference_exponent,
    sample_wave,
    smoothed_rarefaction_Ur,
)
from plapclaw.diagnostics import GRADIENT_BRANCH_POINT

# ∫e^{-2x^2} = sqrt(pi/2); 40-digit mpmath value of its fourth root
GAUSS_L2 = 1.1195151349202476
# (7/3)(2/3)^{2/3} 2^{1/3} and its reciprocal, 40-digit mpmath
HAT_RHS = 2.2434993315893019
HAT_RATIO = 0.44573224779683660


def _hat(x, width=1.0):
    return np.maximum(0.0, 1.0 - np.abs(x) / width)


def test_lq_norm_indicator():
    g = Grid(-1.0, 2.0, 300)
    v = ((g.centers > 0) & (g.centers < 1)).astype(float)
    assert lq_norm(Field(g, v), 3) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("q", [1, 2, 3.5, "inf"])
def test_lq_norm_constant_block(q):
    g = Grid(0.0, 4.0, 400)
    c = 2.5
    qf = math.inf if q == "inf" else float(q)
    expected = c if qf == math.inf else c * 4.0 ** (1 / qf)
    assert lq_norm(Field(g, np.full(400, c)), q) == pytest.approx(expected, rel=1e-13)


def test_lq_norm_gaussian():
    g = Grid(-10.0, 10.0, 100_000)
    assert lq_norm(Field(g, np.exp(-g.centers**2)), 2) == pytest.approx(GAUSS_L2, abs=1e-6)


def test_lq_norm_rejects_small_q():
    g = Grid(0.0, 1.0, 4)
    with pytest.raises(ValueError):
        lq_norm(Field(g, np.ones(4)), 0.5)


@given(st.floats(-1e3, 1e3), st.sampled_from([1.0, 1.5, 2.0, 7.0, math.inf]))
def test_lq_norm_homogeneous(c, q):
    g = Grid(-3.0, 3.0, 257)
    v = np.sin(g.centers) * np.exp(-g.centers**2)
    assert lq_norm(Field(g, c * v), q) == pytest.approx(abs(c) * lq_norm(Field(g, v), q),
                                                        rel=1e-12, abs=1e-300)


@settings(max_examples=200)
@given(st.floats(1.0, 5.0), st.floats(0.0, 5.0), st.floats(0.2, 6.0), st.integers(0, 2**31))
def test_holder_consistency(q1, dq, L, seed):
    q2 = q1 + dq
    g = Grid(0.0, L, 200)
    v = np.random.default_rng(seed).normal(size=200)
    lhs = lq_norm(Field(g, v), q1)
    rhs = L ** (1 / q1 - 1 / q2) * lq_norm(Field(g, v), q2)
    assert lhs <= rhs * (1 + 1e-10)


def test_discrete_gradient_examples():
    g = Grid(0.0, 1.0, 50)
    np.testing.assert_allclose(discrete_gradient(Field(g, g.centers)).values, 1.0, rtol=1e-12)
    np.testing.assert_array_equal(discrete_gradient(Field(g, np.full(50, 3.0))).values, 0.0)
    with pytest.raises(ValueError):
        discrete_gradient(Field(Grid(0.0, 1.0, 2), [0.0, 1.0]))


def test_discrete_gradient_second_order_inside():
    errs = []
    for n in (200, 400, 800):
        g = Grid(0.0, 2 * np.pi, n)
        d = discrete_gradient(Field(g, np.sin(g.centers))).values
        errs.append(np.max(np.abs(d - np.cos(g.centers))[1:-1]))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)


@pytest.fixture
def ws():
    return WaveState(FluxModel.burgers(), FarField(-0.5, 0.5))


def test_deviation_examples(ws):
    g = Grid(-30.0, 30.0, 3000)
    ur = sample_wave(g, 4.0, ws, "smoothed")
    np.testing.assert_array_equal(deviation(ur, 4.0, ws, "smoothed").values, 0.0)
    bump = 0.2 * np.exp(-(g.centers - 1.0) ** 2)
    np.testing.assert_allclose(deviation(ur + bump, 4.0, ws, "smoothed").values, bump, atol=1e-15)
    u = Field(g, np.full(3000, 0.7))
    np.testing.assert_allclose(deviation(u, 1.0, None, "constant", constant=0.3).values, 0.4)
    exact = sample_wave(g, 4.0, ws, "exact")
    np.testing.assert_array_equal(deviation(exact, 4.0, ws, "exact").values, 0.0)


def test_energy_report_zero_deviation(ws):
    g = Grid(-30.0, 30.0, 6000)
    ur = sample_wave(g, 3.0, ws, "smoothed")
    rep = energy_report(ur, 3.0, 0.5, 2.0, ws, ViscosityParams(2.0))
    assert rep.weighted_lq == 0 and rep.fan_term == 0 and rep.dissipation == 0
    du = discrete_gradient(ur).values
    assert rep.grad_energy == pytest.approx(np.sum(np.abs(du) ** 3) * g.dx)
    assert rep.grad_energy > 0 and rep.grad_dissipation > 0


def test_energy_report_constant_state():
    g = Grid(-5.0, 5.0, 100)
    u = Field(g, np.full(100, 0.8))
    rep = energy_report(u, 2.0, 1.0, 3.0, None, ViscosityParams(1.5), "constant", constant=0.3)
    assert rep.weighted_lq == pytest.approx(3.0 * 0.5**3 * 10.0)
    assert rep.fan_term == rep.dissipation == rep.grad_energy == rep.grad_dissipation == 0.0


def test_energy_report_hat_closed_form(ws):
    # φ = hat on [-1,1], p = q = 2: ∫(φ')²|φ'| = 2 and ∫(φ')²|U^r_x| = U^r(1) - U^r(-1)
    t = 5.0
    g = Grid(-20.0, 20.0, 400_000)
    phi = _hat(g.centers)
    u = sample_wave(g, t, ws, "smoothed") + phi
    rep = energy_report(u, t, 0.0, 2.0, ws, ViscosityParams(2.0))
    rise = float(smoothed_rarefaction_Ur(t, 1.0, ws) - smoothed_rarefaction_Ur(t, -1.0, ws))
    assert rep.dissipation == pytest.approx(2.0 + rise, rel=1e-3)
    assert rep.phi_lq_q == pytest.approx(2.0 / 3.0, rel=1e-6)
    assert rep.phi_lp_p == pytest.approx(2.0 / 3.0, rel=1e-6)
    fan, _ = integrate.quad(
        lambda x: (1 - abs(x)) ** 2 * float(np.gradient(
            smoothed_rarefaction_Ur(t, np.array([x - 1e-6, x + 1e-6]), ws), 2e-6)[0]),
        -1, 1, points=[0.0])
    assert rep.fan_term == pytest.approx(fan, rel=1e-5)


def test_energy_report_skips_singular_weight(ws):
    g = Grid(-20.0, 20.0, 2000)
    u = sample_wave(g, 1.0, ws, "smoothed") + 0.1 * np.exp(-g.centers**2)
    assert energy_report(u, 1.0, 0.0, 1.5, ws, ViscosityParams(2.0)).dissipation is None


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31), st.floats(1.01, 4.0), st.floats(1.0, 6.0), st.floats(0.0, 3.0))
def test_energy_terms_nonnegative(seed, p, q, alpha):
    rng = np.random.default_rng(seed)
    g = Grid(-10.0, 10.0, 200)
    ws = WaveState(FluxModel.burgers(), FarField(-1.0, 1.0))
    u = Field(g, rng.uniform(-2, 2, 200))
    rep = energy_report(u, float(rng.uniform(0, 50)), alpha, q, ws, ViscosityParams(p))
    for name, val in rep.as_dict().items():
        if val is not None and name != "t":
            assert val >= 0, name


def test_interpolation_hat():
    g = Grid(-3.0, 3.0, 600_001)   # odd count: a centre sits on the peak
    lhs, rhs, ratio = interpolation_check(Field(g, _hat(g.centers)), 2.0, 2.0)
    assert lhs == pytest.approx(1.0, abs=1e-5)
    assert rhs == pytest.approx(HAT_RHS, rel=1e-4)
    assert ratio == pytest.approx(HAT_RATIO, rel=1e-4)


def test_interpolation_zero_field():
    g = Grid(-1.0, 1.0, 10)
    assert interpolation_check(Field(g, np.zeros(10)), 2.0, 3.0) == (0.0, 0.0, 0.0)


def test_interpolation_gaussian():
    g = Grid(-10.0, 10.0, 10_000)
    _, _, ratio = interpolation_check(Field(g, np.exp(-g.centers**2)), 1.5, 3.0)
    assert ratio < 1.05


def test_interpolation_requires_decay():
    g = Grid(-1.0, 1.0, 100)
    with pytest.raises(ValueError, match="interpolation check requires decaying field"):
        interpolation_check(Field(g, np.ones(100)), 2.0, 2.0)
    with pytest.raises(ValueError):
        interpolation_check(Field(g, np.zeros(100)), 2.0, 1.5)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**31), st.floats(1.05, 4.0), st.floats(2.0, 8.0))
def test_interpolation_ratio_bounded(seed, p, q):
    rng = np.random.default_rng(seed)
    g = Grid(-25.0, 25.0, 5000)
    v = np.zeros(5000)
    for _ in range(rng.integers(1, 5)):
        c, w, a = rng.uniform(-8, 8), rng.uniform(0.2, 3.0), rng.normal()
        v += a * np.exp(-((g.centers - c) / w) ** 2)
    assert interpolation_check(Field(g, v), p, q)[2] <= 1.05


@pytest.mark.parametrize("expo, scale", [(-0.5, 1.0), (-0.25, 3.0), (0.0, 2.0), (-1.3, 0.1)])
def test_decay_fit_recovers_planted_exponent(expo, scale):
    t = np.geomspace(1.0, 1e3, 30)
    fit = decay_fit(t, scale * (1 + t) ** expo, expo, (1.0, 1e3))
    assert abs(fit.exponent - expo) <= 1e-8
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.intercept == pytest.approx(math.log(scale))
    assert fit.passed and fit.n_samples == 30


def test_decay_fit_modulated():
    t = np.geomspace(1.0, 1e3, 60)
    fit = decay_fit(t, (1 + t) ** -0.5 * (1 + 0.01 * np.sin(t)), -0.5, (1.0, 1e3))
    assert fit.exponent == pytest.approx(-0.5, abs=0.01)


def test_decay_fit_one_sided_and_two_sided():
    t = np.geomspace(1.0, 100.0, 10)
    v = (1 + t) ** -1.0
    assert decay_fit(t, v, -0.5, (1.0, 100.0), 0.15).passed
    assert not decay_fit(t, v, -0.5, (1.0, 100.0), 0.15, two_sided=True).passed
    assert not decay_fit(t, (1 + t) ** -0.2, -0.5, (1.0, 100.0), 0.15).passed


def test_decay_fit_default_window_and_errors():
    t = np.linspace(0, 100, 101)
    fit = decay_fit(t, (1 + t) ** -0.3, -0.3)
    assert fit.window == (10.0, 100.0)
    with pytest.raises(ValueError, match=">= 5 samples"):
        decay_fit(t[:4] + 1, np.ones(4), 0.0, (1.0, 5.0))
    with pytest.raises(ValueError):
        decay_fit(t, np.zeros(101), 0.0, (10.0, 100.0))
    with pytest.raises(ValueError):
        decay_fit(t, np.ones(101), 0.0, (10.0, 1.0))


@pytest.mark.parametrize("q, expected", [(1, 0.0), (2, -0.125), ("inf", -0.25)])
def test_reference_thm72(q, expected):
    assert reference_exponent("Thm7.2", 2.0, q=q) == pytest.approx(expected, abs=1e-15)


def test_reference_values():
    assert reference_exponent("Thm1.4", 2.0, q=2) == 0.0
    assert reference_exponent("Thm1.4", 2.0, q="inf") == pytest.approx(-1 / 7)
    assert reference_exponent("Thm1.1", 3.0, q=4) == pytest.approx(-0.05)
    assert reference_exponent("Thm7.2", 2.0, quantity="grad") == pytest.approx(-5 / 12)
    assert reference_exponent("Thm1.2", 2.0, quantity="grad") == pytest.approx(-3 / 24)
    assert reference_exponent("Thm7.3", 2.0, r=3.0, quantity="grad") == pytest.approx(-49 / 112)
    assert reference_exponent("Thm1.3", 2.0, r=3.0, quantity="grad") == pytest.approx(-8 / 64)
    with pytest.raises(ValueError):
        reference_exponent("Thm1.4", 2.0, q=1)
    with pytest.raises(ValueError):
        reference_exponent("Thm9.9", 2.0, q=2)
    with pytest.raises(ValueError):
        reference_exponent("Thm1.6", 2.0, r=1.5, quantity="grad")


def test_gradient_branch_selection():
    assert GRADIENT_BRANCH_POINT == pytest.approx(1.1150692933039049, rel=1e-15)
    # below the branch point the fast rate -p/(p+1) applies
    assert reference_exponent("Thm1.5", 1.1, quantity="grad") == pytest.approx(-1.1 / 2.1)
    # above it, the slow rate -3/(2(p+1)(3p-2))
    assert reference_exponent("Thm1.5", 1.5, quantity="grad") == pytest.approx(-0.24)
    assert reference_exponent("Thm1.6", 1.1, r=2.0, quantity="grad") == pytest.approx(
        -(2 * 1.1 * 2 + 1.1**2 + 2) / ((3 * 1.1 + 1) * 3))
