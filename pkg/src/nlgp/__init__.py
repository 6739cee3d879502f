"""Periodic nonlocal Gross-Pitaevskii toolkit.

Three things live here: a filtered pseudo-spectral time integrator for the
cubic (local or nonlocally smoothed) equation on the torus, the explicit
family of traveling-wave solutions supported by a sin^2 potential, and the
Bloch eigenvalue machinery that decides their spectral stability.
"""

from .spectral import (
    FilterSpec,
    PeriodicGrid,
    WaveField,
    apply_filter,
    drop_nyquist,
    norm,
)
from .kernels import (
    KernelSpec,
    NonpositiveMultiplierError,
    ScaledKernel,
    ValidationReport,
    beta,
    convolve_periodic,
    kernel_from_name,
    lipschitz_gap,
    multiplier,
    validate_hypotheses,
    x_weighted_l1,
)
from .waves import (
    BetaZeroError,
    OffsetTooSmallError,
    PeriodMismatchError,
    SolutionParams,
    StationaryState,
    build_solution,
    sine_squared_potential,
    solution_params,
    stationary_residual,
)
from .evolution import (
    AdaptiveRK45,
    EvolutionConfig,
    FixedRK4,
    NonFiniteError,
    PerturbationSpec,
    SineSquared,
    StepSizeUnderflowError,
    TabulatedPotential,
    Trajectory,
    conserved_quantities,
    evolve,
    perturbed_initial,
    random_band_limited,
    rhs,
    write_summary_csv,
    write_trajectory_csv,
)
from .bloch import (
    AnalyticEigen,
    BlochOperator,
    EigenReport,
    EigensolveError,
    InvalidMuError,
    TruncationTooSmallError,
    a_crit,
    analytic_spectrum_V0_zero,
    assemble,
    b_star,
    eigen_summary,
    full_period_spectrum,
    generalized_zero_mode,
    hill_quadratic_form,
    instability_predicate,
    krein_form,
    match_spectra,
    matrix_quadratic_form,
    phase_zero_mode,
    spectrum,
    write_eigen_csv,
)
from .experiments import (
    FIGURE_REGIMES,
    AesTable,
    FigureRegimeResult,
    StabilityMap,
    fit_growth_rate,
    run_aes_sweep,
    run_figure_regime,
    stability_map,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveRK45", "AesTable", "AnalyticEigen", "BetaZeroError",
    "BlochOperator", "EigenReport", "EigensolveError", "EvolutionConfig",
    "FIGURE_REGIMES", "FigureRegimeResult", "FilterSpec", "FixedRK4",
    "InvalidMuError", "KernelSpec", "NonFiniteError",
    "NonpositiveMultiplierError", "OffsetTooSmallError", "PeriodMismatchError",
    "PeriodicGrid", "PerturbationSpec", "ScaledKernel", "SineSquared",
    "SolutionParams", "StabilityMap", "StationaryState",
    "StepSizeUnderflowError", "TabulatedPotential", "Trajectory",
    "TruncationTooSmallError", "ValidationReport", "WaveField", "a_crit",
    "analytic_spectrum_V0_zero", "apply_filter", "assemble", "b_star", "beta",
    "build_solution", "conserved_quantities", "convolve_periodic",
    "drop_nyquist", "eigen_summary", "evolve", "fit_growth_rate",
    "full_period_spectrum", "generalized_zero_mode", "hill_quadratic_form",
    "instability_predicate", "kernel_from_name", "krein_form", "lipschitz_gap",
    "match_spectra", "matrix_quadratic_form", "multiplier", "norm",
    "perturbed_initial", "phase_zero_mode", "random_band_limited", "rhs",
    "run_aes_sweep", "run_figure_regime", "sine_squared_potential",
    "solution_params", "spectrum", "stability_map", "stationary_residual",
    "validate_hypotheses", "write_eigen_csv", "write_summary_csv",
    "write_trajectory_csv", "x_weighted_l1",
]
