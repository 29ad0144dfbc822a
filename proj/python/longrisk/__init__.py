"""Lee-Carter mortality modelling and annuity liability risk decomposition."""

from ._core import (
    Annuitant,
    ClosedTable,
    DecompositionConfig,
    DecompositionResult,
    DecompositionRound,
    DriftModel,
    LeeCarterModel,
    LiabilityDistribution,
    LongriskError,
    MortalitySurface,
    OmegaCurvePoint,
    Portfolio,
    SampleSummary,
    StochasticSimOptions,
    SyntheticPortfolioOptions,
    SyntheticWorldOptions,
    close_table,
    converge,
    expected_flows,
    extrapolate_k,
    fit,
    fit_drift,
    inverse_normal_cdf,
    load_mortality_csv,
    load_portfolio_csv,
    mu_to_q,
    nested_simulate,
    omega_curve,
    project_closed_surface,
    q_to_mu,
    reference_drift,
    replicate,
    reserve,
    simulate_lambda,
    simulate_lambda_stochastic,
    summarize,
    synthetic_portfolio,
    synthetic_surface,
)

__all__ = [
    "Annuitant",
    "ClosedTable",
    "DecompositionConfig",
    "DecompositionResult",
    "DecompositionRound",
    "DriftModel",
    "LeeCarterModel",
    "LiabilityDistribution",
    "LongriskError",
    "MortalitySurface",
    "OmegaCurvePoint",
    "Portfolio",
    "SampleSummary",
    "StochasticSimOptions",
    "SyntheticPortfolioOptions",
    "SyntheticWorldOptions",
    "close_table",
    "converge",
    "expected_flows",
    "extrapolate_k",
    "fit",
    "fit_drift",
    "inverse_normal_cdf",
    "load_mortality_csv",
    "load_portfolio_csv",
    "mu_to_q",
    "nested_simulate",
    "omega_curve",
    "project_closed_surface",
    "q_to_mu",
    "reference_drift",
    "replicate",
    "reserve",
    "simulate_lambda",
    "simulate_lambda_stochastic",
    "summarize",
    "synthetic_portfolio",
    "synthetic_surface",
]
