"""Error-in-operator regression: estimators, leading-term diagnostics and
the synthetic experiment drivers, backed by the C++ core."""

from eio._core import (
    MU_INFINITY,
    BoundConfig,
    Dataset,
    EioError,
    FitReport,
    Hyperparams,
    PopulationStats,
    SufficientStats,
    Triplet,
    ValidatedSpec,
    a_update,
    bias_leading_term,
    concentration_bound_cov,
    concentration_bound_noise,
    eio_fit,
    excess_risk,
    gaussian_spec,
    gen_design,
    objective_empirical,
    objective_population,
    default_lambda_grid,
    default_mu_grid,
    plugin_fit,
    population_fit,
    psi_bound,
    ratio_bias_experiment,
    ridge_fit,
    risk_bound_rhs,
    sine_spec,
    spectral_summary,
    sufficient_stats,
    theta_update,
    true_covariance,
    variance_leading_term,
)

__all__ = [
    "MU_INFINITY",
    "BoundConfig",
    "Dataset",
    "EioError",
    "FitReport",
    "Hyperparams",
    "PopulationStats",
    "SufficientStats",
    "Triplet",
    "ValidatedSpec",
    "a_update",
    "bias_leading_term",
    "concentration_bound_cov",
    "concentration_bound_noise",
    "eio_fit",
    "excess_risk",
    "gaussian_spec",
    "gen_design",
    "objective_empirical",
    "objective_population",
    "default_lambda_grid",
    "default_mu_grid",
    "plugin_fit",
    "population_fit",
    "psi_bound",
    "ratio_bias_experiment",
    "ridge_fit",
    "risk_bound_rhs",
    "sine_spec",
    "spectral_summary",
    "sufficient_stats",
    "theta_update",
    "true_covariance",
    "variance_leading_term",
]

__version__ = "0.1.0"
