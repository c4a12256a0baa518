"""Finite-volume simulation and decay-rate diagnostics for scalar conservation
laws with p-Laplacian (degenerate) viscosity.

    u_t + f(u)_x = mu (|u_x|^{p-1} u_x)_x,    u(t, ±∞) = u_±
"""

from .model import (
    FarField,
    Field,
    FluxModel,
    Grid,
    ViscosityParams,
    lambda_inverse,
    signed_pow,
    split_identity_residual,
)
from .waves import (
    WaveKind,
    WaveState,
    burgers_rarefaction,
    exact_rarefaction,
    sample_wave,
    smoothed_burgers,
    smoothed_rarefaction_grad,
    smoothed_rarefaction_Ur,
)
from .oracles import (
    BarenblattParams,
    barenblatt,
    barenblatt_field,
    barenblatt_mass,
    barenblatt_residual,
)
from .solver import (
    BaseState,
    Boundary,
    BumpShape,
    InitialSpec,
    NumericalBlowUp,
    Perturbation,
    Problem,
    TimeSchedule,
    Trajectory,
    numerical_flux,
    run,
    run_ensemble,
    stable_dt,
    step,
    viscous_flux,
)
from .diagnostics import (
    Asymptote,
    DecayFit,
    EnergyReport,
    decay_fit,
    deviation,
    discrete_gradient,
    energy_report,
    interpolation_check,
    lq_norm,
    reference_exponent,
)

__version__ = "0.1.0"
