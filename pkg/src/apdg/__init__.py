"""Asymptotic-preserving, positivity-preserving DG solver for the 1D
semiconductor kinetic equation in diffusive scaling, with even-odd parity
decomposition, Gauss-Hermite velocity discretization, self-consistent Poisson
coupling, and drift-diffusion reference solvers."""

from ._kernels import backend_name
from .dg import DGBasis, DGSpace, Mesh1D, build_basis, phase_norm, weak_derivative
from .fields import (
    FieldSample,
    PoissonConfig,
    PoissonField,
    PrescribedField,
    ZeroField,
    doping_profile,
    pulse_field,
    solve_poisson,
)
from .hermite import (
    CollisionKernel,
    VelocityGrid,
    build_collision_kernel,
    build_velocity_grid,
    collision_apply,
    diffusion_constant,
    hermite_transform,
    moment_density,
    relaxed_operator_P,
    velocity_derivative,
)
from .limits import (
    DriftDiffusionSolver,
    decaying_cosine_density,
    drift_diffusion_solve,
    ldg_limit_step,
)
from .scheme import (
    InflowBC,
    ParityState,
    SchemeParams,
    SchemeError,
    Solver,
    StepDiagnostics,
    maxwellian_inflow,
    theorem_dt,
)

__version__ = "0.1.0"
