"""
Kolmogorov-Smirnov distances between approximate posteriors.

    δ(y, y') = sup_θ |G_y(θ) − G_y'(θ)|

computed three ways: exactly from two samples (merged-sort sweep), from two
CDFs tabulated on a shared grid, and for discrete posteriors along a fixed
label ranking. A Euclidean summary-statistic distance is included as the
simple fallback.
"""

from typing import Hashable, Mapping, Optional, Sequence

import numpy as np

from errors import EmptySample, GridMismatch, UnrankedLabel


def ks_continuous(theta_a: Sequence[float], theta_b: Sequence[float]) -> float:
    """
    Two-sample KS statistic.

    Both empirical CDFs are evaluated at every pooled sample point, which is
    where the supremum is attained.
    """
    a = np.sort(np.asarray(theta_a, dtype=float).ravel())
    b = np.sort(np.asarray(theta_b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptySample("ks_continuous needs two nonempty samples")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_grid(
    cdf_a: Sequence[float],
    cdf_b: Sequence[float],
    grid_a: Optional[Sequence[float]] = None,
    grid_b: Optional[Sequence[float]] = None,
) -> float:
    """Sup-norm distance of two CDFs tabulated on the same grid."""
    fa = np.asarray(cdf_a, dtype=float)
    fb = np.asarray(cdf_b, dtype=float)
    if fa.shape != fb.shape or fa.ndim != 1:
        raise GridMismatch(f"CDF tables have shapes {fa.shape} and {fb.shape}")
    if grid_a is not None or grid_b is not None:
        if grid_a is None or grid_b is None:
            raise GridMismatch("both grids must be supplied")
        ga = np.asarray(grid_a, dtype=float)
        gb = np.asarray(grid_b, dtype=float)
        if ga.shape != fa.shape or not np.array_equal(ga, gb):
            raise GridMismatch("CDFs are tabulated on different grids")
    if fa.size == 0:
        return 0.0
    return float(np.max(np.abs(fa - fb)))


def ks_discrete(
    p_a: Mapping[Hashable, float],
    p_b: Mapping[Hashable, float],
    order_ref: Sequence[Hashable],
) -> float:
    """
    KS distance between two discrete distributions under a fixed ranking.

    Args:
        p_a, p_b: label -> mass
        order_ref: labels ranked by the observed-data posterior (most probable first)

    Raises:
        UnrankedLabel: a label with positive mass is absent from ``order_ref``
    """
    position = {label: i for i, label in enumerate(order_ref)}
    for masses in (p_a, p_b):
        for label, mass in masses.items():
            if mass > 0 and label not in position:
                raise UnrankedLabel(f"label {label!r} is not in the reference order")
    va = np.array([float(p_a.get(label, 0.0)) for label in order_ref])
    vb = np.array([float(p_b.get(label, 0.0)) for label in order_ref])
    if va.size == 0:
        return 0.0
    return float(np.max(np.abs(np.cumsum(va) - np.cumsum(vb))))


def summary_distance(s_a: Sequence[float], s_b: Sequence[float]) -> float:
    """Euclidean distance between summary vectors."""
    a = np.atleast_1d(np.asarray(s_a, dtype=float))
    b = np.atleast_1d(np.asarray(s_b, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"summary dimensions differ: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))
