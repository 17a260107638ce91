"""Pseudo-spectral solvers for the nonlinear Klein-Gordon equation on
truncated periodic domains with perfectly matched layers.

The library provides two layer formulations (a first-order system with
auxiliary fields and an explicit exponential integrator, and a
second-order stretched-coordinate form with a linearly implicit
preconditioned solver), polynomial and regularized singular absorption
profiles, the non-relativistic small-parameter scaling, a 2D rotating
extension, enlarged-domain reference solutions, and error/energy
diagnostics.  See README.md for a tour and ``demos/`` for narrative
examples.
"""

__version__ = "0.1.0"

from .absorption import AbsorptionProfile, ProfileSpec, continuity_order_estimate, sample_profile
from .config import SolverConfig, parse_config, serialize_config
from .errors import BlowUpError, ConfigurationError, GmresDivergenceError
from .krylov import KrylovReport, LinearOperator, gmres_solve
from .metrics import (
    EnergySeries,
    ErrorSeries,
    ReferenceRun,
    dispersion_root,
    energy_HI,
    phase_velocity_eps,
    reference_solve,
    rel_l2_error,
    rel_linf_error,
    restrict_field,
    rotate_to_lab_frame,
)
from .pml1_ewi import Pml1Params, Pml1State, Pml1Stepper, damping_factor, ewi_step, init_pml1
from .pml2_fd import (
    Pml2Params,
    Pml2State,
    Pml2Stepper,
    StretchedLaplacian,
    build_rotating_initial_data,
    fd_step,
    first_step_classical,
    first_step_filtered,
    stability_probe,
)
from .runner import RunManifest, run_convergence, run_single, run_sweep, simulate
from .spectral import (
    Field,
    FourierMultiplier,
    Grid1D,
    Grid2D,
    apply_multiplier,
    field_from_function,
    make_grid,
    make_grid_2d,
    op_bracket,
    op_bracket_eps,
    op_first_derivative,
    op_second_derivative,
    op_trig,
)
