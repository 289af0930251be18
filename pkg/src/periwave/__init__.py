"""Quadrature and spectral solvers for the 1D peridynamic wave equation."""

from .model import (
    Material,
    GaussianKernel,
    FiniteHorizonKernel,
    BondStretchForce,
    QuadraticStretchForce,
    CubicKernelForce,
    ProblemSpec,
    eval_micromodulus,
    eval_force,
    linearize_force,
    within_horizon,
)
from .quadrature import (
    Grid,
    StiffnessOperator,
    build_grid,
    assemble_stiffness,
    regularize,
    default_regularization_order,
    sample_function,
    export_matrix,
    horizon_volume_fraction,
    MIDPOINT,
    GAUSS2,
)
from .linalg import (
    eig_symmetric,
    matrix_sqrt_spd,
    sinc_unnormalized,
    SpectralDecomposition,
    build_trig_cache,
    factor_spd,
    solve_spd,
)
from .integrators import (
    TimeGrid,
    IntegratorState,
    StabilityBound,
    Trajectory,
    EnergyReport,
    make_time_grid,
    step_stormer_verlet,
    step_implicit_midpoint,
    step_trig2,
    step_trig4,
    stability_bounds,
    integrate,
    energy_series,
)
from .reference import (
    peridynamic_exact,
    peridynamic_exact_table,
    wave_dalembert,
    nonlinear_series,
    series_tail_bound,
    ErrorReport,
    error_norms,
    convergence_orders,
)
from .spectral import (
    SpectralModel,
    dft_forward,
    dft_forward_direct,
    dft_inverse,
    frequency_omega,
    evolve_mode,
    spectral_solve,
    spectral_to_csv,
)
from .nonlinear import (
    FixedPointError,
    FullNonlinear,
    Linearized,
    Trapezoidal,
    Taylor,
    taylor_closure_force,
    bar_grid,
    NonlinearRHS,
    assemble_nonlinear_rhs,
    step_nonlinear_sv,
    step_nonlinear_im,
    integrate_nonlinear,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    Rung,
    TableArtifact,
    preset_config,
    parse_config,
    emit_csv,
    run_experiment,
)

__version__ = "0.1.0"
