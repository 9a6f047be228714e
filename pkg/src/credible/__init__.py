"""
Credible-set construction: sample order statistics, grid densities and
discrete highest-mass sets.
"""

from .sets import (
    SetKind,
    CredibleSet,
    GridDensity,
    ceil_index,
    interval_from_samples,
    interval_from_grid,
    credible_set_from_density,
    discrete_hpd,
    rank_labels,
    empirical_masses,
)

__all__ = [
    "SetKind",
    "CredibleSet",
    "GridDensity",
    "ceil_index",
    "interval_from_samples",
    "interval_from_grid",
    "credible_set_from_density",
    "discrete_hpd",
    "rank_labels",
    "empirical_masses",
]
