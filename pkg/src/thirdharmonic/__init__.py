"""Numerical laboratory for a coupled cubic Schrodinger system.

The system couples a beam u with its third harmonic v:

    i du/dt + Lap u - u  = -(|u|^2/9 + 2|v|^2) u - conj(u)^2 v / 3
    i gamma dv/dt + Lap v - mu v = -(9|v|^2 + 2|u|^2) v - u^3 / 9

on R^3, with gamma, mu > 0.  The package computes ground states of the
associated stationary system, the sharp interaction inequality constant and
the global-existence / blow-up threshold products, evolves initial data with
a Strang-split spectral integrator, and monitors every conservation law,
virial identity, and Morawetz-type bound at desk scale.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    ConvergenceError,
    LabError,
    NumericalFaultError,
    SeedError,
    ShapeMismatchError,
    TrivialSolutionError,
    UnsupportedModeError,
    ValidationError,
)
from .grids import (
    ComplexField,
    GridSpec,
    Mode,
    StatePair,
    check_support_margin,
    integrate,
    zero_field,
)
from .operators import apply_multiplier, gradient, laplacian
from .functionals import (
    FunctionalReport,
    action,
    energy,
    interaction_density,
    interaction_morawetz,
    kinetic,
    local_mass,
    mass,
    momentum_density,
    pohozaev,
    potential,
    report,
    virial_quantity,
)
from .weights import (
    CutoffProfile,
    MorawetzWeights,
    ProfileKind,
    build_morawetz_weights,
    chi,
    cylindrical_weight,
    radial_virial_weight,
    smoothstep,
    tangential_projector,
    varrho,
    vartheta,
    verify_weight_identities,
    zeta,
)
from .groundstate import (
    GroundStateConstants,
    GroundStateSolution,
    elliptic_residual,
    gn_constant,
    gn_test,
    solve_ground_state,
    threshold_constants,
)
from .evolution import (
    BoostParams,
    EvolutionConfig,
    Termination,
    TrajectoryRecord,
    blowup_monitor,
    evolve,
    galilean_boost,
    linear_step,
    morawetz_monitor,
    nonlinear_step,
    scattering_profile,
    spacetime_norm_window,
    strang_step,
    virial_rate_check,
)
from .classify import Symmetry, Verdict, VerdictBasis, VerdictKind, classify, validate_symmetry
from . import snapshots
