"""
Rarefaction waves and their smooth approximant
==============================================

The exact rarefaction fan ``u^r(x/t)`` has corners at ``x = λ(u±) t``.
The smooth approximant ``U^r`` is built by solving inviscid Burgers with
``tanh`` data along characteristics and mapping back through ``λ⁻¹``.
This script compares the two and watches the gap close.
"""

# %%
# A convex quartic flux f(u) = u²/2 + u⁴/4, so λ(u) = u + u³.
from plapclaw import FarField, FluxModel, Grid, WaveState, discrete_gradient, lq_norm, sample_wave

flux = FluxModel.poly((0.0, 0.0, 0.5, 0.0, 0.25), -5.0, 5.0)
ws = WaveState(flux, FarField(-1.0, 1.0))
print(f"fan speeds: λ- = {ws.lam_minus:+.3f}, λ+ = {ws.lam_plus:+.3f}")

# %%
# Sup distance between U^r and u^r shrinks as the fan spreads out.
print(f"{'t':>8} {'sup|U^r - u^r|':>16} {'||dU^r/dx||_inf':>16}")
for t in (1.0, 10.0, 100.0, 1000.0):
    g = Grid(ws.lam_minus * t - 30, ws.lam_plus * t + 30, 20000)
    smooth = sample_wave(g, t, ws, "smoothed")
    exact = sample_wave(g, t, ws, "exact")
    grad = lq_norm(discrete_gradient(smooth), "inf")
    print(f"{t:8.0f} {lq_norm(smooth - exact, 'inf'):16.3e} {grad:16.3e}")

# %%
# Three cells centred on x = -200, 0, 200: at t = 100 the fan spans
# |x| <= 200, so the outer cells sit at its edges.
print("U^r(100, x) at x = -200, 0, 200:", sample_wave(Grid(-300, 300, 3), 100.0, ws).values)
