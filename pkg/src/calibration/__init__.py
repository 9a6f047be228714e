"""
Coverage calibration for approximate Bayesian credible sets: configuration,
replicate farming, oracle / regression / importance-sampling estimators,
coverage curves and run artifacts.
"""

__version__ = "1.0.0"

from .config import CalibrationConfig
from .engine import (
    Replicate,
    ReplicateBank,
    CoverageEstimate,
    run_oracle,
    oracle_bank,
    run_regression_bank,
    fit_bank,
    estimate_coverage_at,
    run_importance_sampler,
    weighted_estimate,
    window_estimate,
    exact_operational_coverage,
    operational_coverage,
)
from .curve import (
    CoverageCurve,
    coverage_curve,
    curve_from_bank,
    oracle_coverage_curve,
    distortion_curve,
    invert_nominal_level,
    recalibrate_cdf,
    recalibrated_quantile,
)

__all__ = [
    "CalibrationConfig",
    "Replicate",
    "ReplicateBank",
    "CoverageEstimate",
    "run_oracle",
    "oracle_bank",
    "run_regression_bank",
    "fit_bank",
    "estimate_coverage_at",
    "run_importance_sampler",
    "weighted_estimate",
    "window_estimate",
    "exact_operational_coverage",
    "operational_coverage",
    "CoverageCurve",
    "coverage_curve",
    "curve_from_bank",
    "oracle_coverage_curve",
    "distortion_curve",
    "invert_nominal_level",
    "recalibrate_cdf",
    "recalibrated_quantile",
]
