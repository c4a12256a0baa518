"""
The Barenblatt source solution as a solver oracle
=================================================

Without convection the equation reduces to ``u_t = mu (|u_x|^{p-1} u_x)_x``,
which has a compactly supported self-similar solution. We first confirm the
closed form solves the PDE, then use it to measure how fast the finite-volume
solver converges.
"""

# %%
from plapclaw import (
    BarenblattParams, FarField, Grid, InitialSpec, Problem, TimeSchedule, ViscosityParams,
    barenblatt_field, barenblatt_mass, barenblatt_residual, lq_norm, run,
)

for p in (1.5, 2.0, 3.0):
    b = BarenblattParams(p, 1.0)
    print(f"p={p:3.1f}  support half-width {b.xi_max:.4f}  mass {barenblatt_mass(b):.6f}  "
          f"normalised residual {barenblatt_residual(b):.1e}")

# %%
# Start the solver on the exact profile at t = 1 and compare at t = 2.
params = BarenblattParams(2.0, 1.0)
prev = None
for n in (500, 1000, 2000, 4000):
    prob = Problem(ViscosityParams(2.0), FarField(0.0, 0.0),
                   InitialSpec("barenblatt", t0=1.0, C=1.0), Grid(-12.0, 12.0, n),
                   TimeSchedule(2.0, (2.0,), t_start=1.0), None, "zero_gradient")
    err = lq_norm(run(prob).snapshots[-1] - barenblatt_field(prob.grid, 2.0, params), "inf")
    ratio = "" if prev is None else f"  ratio {prev / err:.2f}"
    print(f"n={n:5d}  L-inf error {err:.3e}{ratio}")
    prev = err
