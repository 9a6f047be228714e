"""
Dataset distances for importance-sampler windows.
"""

from .ks import ks_continuous, ks_grid, ks_discrete, summary_distance
from .window import (
    DistanceFunction,
    SummaryDistance,
    KSDistance,
    KSSampleDistance,
    make_distance,
)

__all__ = [
    "ks_continuous",
    "ks_grid",
    "ks_discrete",
    "summary_distance",
    "DistanceFunction",
    "SummaryDistance",
    "KSDistance",
    "KSSampleDistance",
    "make_distance",
]
