"""
Window distances δ(y', y) used by the importance sampler.

A ``DistanceFunction`` is configured once, then bound to the observed data
to give a callable evaluated on every proposal. Binding precomputes what is
shared across proposals (the observed summary, the observed posterior's CDF
table or label ranking, or a reference sample of θ).
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Callable, Optional

import numpy as np

from distances.ks import ks_continuous, ks_discrete, ks_grid, summary_distance
from models.base import ApproxPosterior, DiscretePosterior, ModelInterface

logger = logging.getLogger(__name__)

# Resolution of the shared grid for analytic (non-tabulated) posteriors.
ANALYTIC_GRID_POINTS = 4001

BoundDistance = Callable[[Any, Optional[ApproxPosterior], Optional[np.ndarray]], float]


class DistanceFunction(ABC):
    """Distance between a proposed dataset and the observed one."""

    name: str = "distance"
    # θ' must be drawn before the window test
    needs_theta: bool = False
    # π̃(·|y') must be built before the window test
    needs_posterior: bool = False

    @abstractmethod
    def bind(
        self,
        model: ModelInterface,
        y: Any,
        post_y: ApproxPosterior,
        rng: Optional[np.random.Generator] = None,
        J: int = 1000,
    ) -> BoundDistance:
        """Return ``f(y_prime, post_prime, theta_prime) -> δ``."""


class SummaryDistance(DistanceFunction):
    """Euclidean distance between summary vectors."""

    name = "summary"

    def bind(self, model, y, post_y, rng=None, J=1000):
        s_y = np.asarray(model.summary(y), dtype=float)

        def distance(y_prime, post_prime=None, theta_prime=None) -> float:
            return summary_distance(model.summary(y_prime), s_y)

        return distance


class KSDistance(DistanceFunction):
    """
    KS distance between approximate-posterior CDFs.

    Tabulated posteriors are compared on their shared grid; discrete
    posteriors along the observed ranking >_y; analytic posteriors on a fine
    grid spanning both supports.
    """

    name = "ks"
    needs_posterior = True

    def bind(self, model, y, post_y, rng=None, J=1000):
        if isinstance(post_y, DiscretePosterior):
            order = post_y.ranking()
            masses_y = post_y.masses()

            def discrete_distance(y_prime, post_prime=None, theta_prime=None) -> float:
                post_prime = post_prime if post_prime is not None else model.approx_posterior(y_prime)
                return ks_discrete(masses_y, post_prime.masses(), order)

            logger.debug(f"KS distance bound to the ranking of {len(order)} labels")
            return discrete_distance

        grid_y = post_y.support_grid()
        if grid_y is not None:
            cdf_y = post_y.cdf(grid_y)

            def grid_distance(y_prime, post_prime=None, theta_prime=None) -> float:
                post_prime = post_prime if post_prime is not None else model.approx_posterior(y_prime)
                grid_prime = post_prime.support_grid()
                return ks_grid(cdf_y, post_prime.cdf(grid_prime), grid_y, grid_prime)

            logger.debug(f"KS distance bound to a {grid_y.size}-point posterior grid")
            return grid_distance

        lo_y, hi_y = post_y.support_bounds()
        logger.debug(f"KS distance on {ANALYTIC_GRID_POINTS} points spanning [{lo_y:.4g}, {hi_y:.4g}] and the proposal support")

        def analytic_distance(y_prime, post_prime=None, theta_prime=None) -> float:
            post_prime = post_prime if post_prime is not None else model.approx_posterior(y_prime)
            lo_p, hi_p = post_prime.support_bounds()
            grid = np.linspace(min(lo_y, lo_p), max(hi_y, hi_p), ANALYTIC_GRID_POINTS)
            return ks_grid(post_y.cdf(grid), post_prime.cdf(grid))

        return analytic_distance


class KSSampleDistance(DistanceFunction):
    """
    Two-sample KS distance between J draws from π̃(·|y) and π̃(·|y').

    The reference sample for y is drawn once at bind time; every proposal
    needs its own θ' before the window test.
    """

    name = "ks-samples"
    needs_theta = True
    needs_posterior = True

    def bind(self, model, y, post_y, rng=None, J=1000):
        if rng is None:
            raise ValueError("sample KS distance needs a generator for the reference draws")
        theta_y = np.sort(post_y.sample(J, rng))
        logger.debug(f"Sample KS distance bound to {J} reference draws")

        def distance(y_prime, post_prime=None, theta_prime=None) -> float:
            if theta_prime is None:
                raise ValueError("sample KS distance needs theta for every proposal")
            return ks_continuous(theta_y, theta_prime)

        return distance


DISTANCES = {
    SummaryDistance.name: SummaryDistance,
    KSDistance.name: KSDistance,
    KSSampleDistance.name: KSSampleDistance,
}


def make_distance(name: str) -> DistanceFunction:
    """Look up a distance by CLI name (``summary``, ``ks``, ``ks-samples``)."""
    try:
        return DISTANCES[name]()
    except KeyError:
        raise ValueError(f"unknown distance {name!r} (expected one of: {', '.join(DISTANCES)})") from None
