"""Numerical laboratory for the 3D radial cubic-quintic NLS
i u_t + Lap u = |u|^2 u - |u|^4 u: spectral stepping, variational
thresholds, Morawetz monitors, and the scattering/blowup dichotomy."""

from .grid import (
    RadialField,
    RadialGrid,
    SpectralPlan,
    free_propagate,
    gradient_norm_sq,
    integrate_ball,
    laplacian,
)
from .functionals import (
    CutoffProfile,
    FunctionalReport,
    apply_cutoff,
    cutoff_identity_residual,
    local_l6,
    radial_weighted_sup,
    report,
    spacetime_norm,
)
from .variational import (
    Classification,
    Thresholds,
    classify,
    coercive_on_ball,
    coercivity_gap,
    cubic_barrier,
    ground_state,
    scale_f12,
    scale_phi,
    thresholds,
)
from .dynamics import (
    RunOutcome,
    StepperConfig,
    Trajectory,
    evolve,
    flux_identity_residual,
    nonlinear_phase_step,
    strang_step,
)
from .morawetz import (
    MorawetzSeries,
    MorawetzWeight,
    averaged_local_l6,
    identity_residual,
    morawetz_action,
    morawetz_rate,
    weight_build,
)
from .config import ExperimentConfig, load_config

__version__ = "0.1.0"
