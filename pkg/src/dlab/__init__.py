"""Pseudospectral simulator and variational solver for coupled short-wave /
long-wave dispersive systems: spectral kernels, exact-group integrators,
conserved-quantity monitors, solitary-wave profiles, constrained minimizers,
and an orbital-stability harness."""

__version__ = "0.1.0"

from .spectral import (
    Field,
    Grid,
    apply_airy_group,
    apply_schrodinger_group,
    dealias,
    derivative,
    h1_norm,
    l2_norm2,
    make_grid,
    translate,
)
from .model import (
    Params12,
    Params21,
    Regime,
    State12,
    State21,
    check_global_regime,
    rhs12,
    rhs21,
    signed_power,
)
from .conserved import (
    ConservedReport,
    energy12,
    energy21,
    mass,
    momentum_g,
    momentum_h,
)
from .waves import (
    WaveParams,
    assemble_traveling,
    kdv_multiplier_for_mass,
    kdv_profile,
    nls_multiplier_for_mass,
    nls_profile,
    profile_residual,
)
from .evolve import (
    IntegratorConfig,
    Status,
    Trajectory,
    apriori_bound,
    integrate,
    step,
)
from .varsolve import (
    MinimizerResult,
    SolverOptions,
    boost,
    energy_gradient,
    extract_multipliers,
    lambda_direct,
    lambda_minimize,
    rearrange,
    subadditivity_check,
    theta_minimize,
)
from .stability import StabilityRecord, orbit_distance, perturb, stability_experiment
from .config import ConfigError, RunConfig, parse_config, serialize_config
from .runner import run
