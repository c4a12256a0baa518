"""
Decay of the pure p-Laplacian evolution
=======================================

A compact hat of unit mass spreads under ``u_t = (|u_x| u_x)_x`` (p = 2).
Mass is conserved while the L^q norms decay like
``(1+t)^{-(1/(2p))(1-1/q)}``, the rate of the Barenblatt profile.
This run is short (t = 100) so that it finishes in seconds.
"""

# %%
import math

from plapclaw import (
    FarField, Grid, InitialSpec, Perturbation, Problem, TimeSchedule, ViscosityParams,
    decay_fit, discrete_gradient, lq_norm, reference_exponent, run,
)

p = 2.0
prob = Problem(ViscosityParams(p), FarField(0.0, 0.0),
               InitialSpec("constant", 0.0, perturbation=Perturbation(1.0, 0.0, 1.0, "hat")),
               Grid(-20.0, 20.0, 3000), TimeSchedule.geometric(100.0, log_every=500),
               None, "zero_gradient")
traj = run(prob)
print(f"{traj.steps} steps in {traj.wall_time:.1f}s, max-principle slack {traj.max_principle_slack}")

# %%
for q in (1.0, 2.0, math.inf):
    vals = [lq_norm(u, q) for u in traj.snapshots]
    ref = reference_exponent("Thm7.2", p, q=q)
    fit = decay_fit(traj.times, vals, ref, (10.0, 100.0))
    print(f"q={q:>4}: fitted {fit.exponent:+.4f}  reference {ref:+.4f}")

grad = [lq_norm(discrete_gradient(u), p + 1) for u in traj.snapshots]
ref = reference_exponent("Thm7.2", p, quantity="grad")
print(f"gradient L^(p+1): fitted {decay_fit(traj.times, grad, ref, (10.0, 100.0)).exponent:+.4f}"
      f"  reference {ref:+.4f}")
