"""
Importance-sampling diagnostics.

The rho sweep lives in ``diagnostics.sweep`` and is imported from there; it
depends on the calibration engine, which itself uses these weight metrics.
"""

from .weights import ess, weighted_sigma, clt_variance, marginal_rank_test

__all__ = [
    "ess",
    "weighted_sigma",
    "clt_variance",
    "marginal_rank_test",
]
