"""
Model and posterior interfaces shared by every estimator.

A model supplies the generative pieces of the calibration loop:

    φ ~ π(·)              prior_sampler
    y' ~ p(·|φ)           data_simulator
    π̃(·|y')               approx_posterior
    s(y')                 summary
    π(·|y)                exact_posterior (oracle models only)

Implementations must be shareable read-only across worker threads; all
randomness comes from the generator passed in.
"""

import math
from abc import ABC, abstractmethod
from typing import Any, Dict, Hashable, List, Optional, Tuple

import numpy as np

from credible.sets import CredibleSet, SetKind, empirical_masses, discrete_hpd, interval_from_samples
from errors import MissingOracle


class Posterior(ABC):
    """A posterior over a scalar (or discrete, totally ordered) parameter."""

    discrete: bool = False

    @abstractmethod
    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``size`` parameters."""

    @abstractmethod
    def log_density(self, theta: Any) -> np.ndarray:
        """Log density (or log mass), up to an additive constant."""

    @abstractmethod
    def cdf(self, theta: Any) -> np.ndarray:
        """Posterior CDF."""

    @abstractmethod
    def quantile(self, q: Any) -> np.ndarray:
        """Smallest parameter with CDF >= q."""

    @abstractmethod
    def credible_set(self, alpha: float, kind: SetKind) -> CredibleSet:
        """Exact (or quadrature-exact) level-alpha credible set."""

    def density(self, theta: Any) -> np.ndarray:
        return np.exp(self.log_density(theta))

    def set_from_samples(self, theta_sorted: np.ndarray, alpha: float, kind: SetKind) -> CredibleSet:
        """Credible set estimated from J sorted draws of this posterior."""
        return interval_from_samples(theta_sorted, alpha, kind)

    def mass(self, cset: CredibleSet) -> float:
        """Probability this posterior assigns to ``cset``."""
        if cset.is_discrete:
            raise ValueError("continuous posterior cannot measure a discrete set")
        total = 0.0
        for lo, hi in cset.intervals:
            upper = 1.0 if hi == math.inf else float(self.cdf(hi))
            lower = 0.0 if lo == -math.inf else float(self.cdf(lo))
            total += upper - lower
        return min(max(total, 0.0), 1.0)

    def support_grid(self) -> Optional[np.ndarray]:
        """Grid the posterior is tabulated on, or None for analytic posteriors."""
        return None

    def support_bounds(self, tail: float = 1e-10) -> Tuple[float, float]:
        return float(self.quantile(tail)), float(self.quantile(1.0 - tail))


class ApproxPosterior(Posterior):
    """Approximate posterior that can also score the observed data."""

    @abstractmethod
    def log_likelihood(self, phi: Any) -> np.ndarray:
        """log p̃(y|φ) for the dataset this posterior was built from."""

    def likelihood(self, phi: Any) -> np.ndarray:
        return np.exp(self.log_likelihood(phi))


class DiscretePosterior(ApproxPosterior):
    """
    Posterior over a finite set of labels ordered by their index.

    ``log_weights`` are unnormalized; ``loglik`` holds log p̃(y|label).
    """

    discrete = True

    def __init__(self, labels: List[Hashable], log_weights: np.ndarray, loglik: Optional[np.ndarray] = None):
        self.labels = list(labels)
        lw = np.asarray(log_weights, dtype=float)
        if lw.shape != (len(self.labels),):
            raise ValueError("one log weight per label required")
        shifted = np.exp(lw - np.max(lw))
        self.probabilities = shifted / shifted.sum()
        self._index = {label: i for i, label in enumerate(self.labels)}
        self._loglik = None if loglik is None else np.asarray(loglik, dtype=float)
        self._cumulative = np.cumsum(self.probabilities)

    def masses(self) -> Dict[Hashable, float]:
        return {label: float(p) for label, p in zip(self.labels, self.probabilities)}

    def ranking(self) -> List[Hashable]:
        """The order >_y: labels by descending mass, ties by label order."""
        order = np.lexsort((np.arange(len(self.labels)), -self.probabilities))
        return [self.labels[i] for i in order]

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        idx = np.searchsorted(self._cumulative, rng.random(size), side="right")
        idx = np.minimum(idx, len(self.labels) - 1)
        return np.asarray([self.labels[i] for i in idx])

    def _positions(self, theta: Any) -> np.ndarray:
        values = np.atleast_1d(theta)
        return np.array([self._index[v.item() if isinstance(v, np.generic) else v] for v in values])

    def log_density(self, theta: Any) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.probabilities[self._positions(theta)])

    def cdf(self, theta: Any) -> np.ndarray:
        return self._cumulative[self._positions(theta)]

    def quantile(self, q: Any) -> np.ndarray:
        idx = np.searchsorted(self._cumulative, np.asarray(q, dtype=float) - 1e-12, side="left")
        idx = np.minimum(idx, len(self.labels) - 1)
        return np.asarray(self.labels, dtype=object)[idx]

    def log_likelihood(self, phi: Any) -> np.ndarray:
        if self._loglik is None:
            raise NotImplementedError("this posterior carries no likelihood")
        return self._loglik[self._positions(phi)]

    def credible_set(self, alpha: float, kind: SetKind = SetKind.DISCRETE_HPD) -> CredibleSet:
        kind = SetKind.parse(kind)
        if kind == SetKind.DISCRETE_HPD:
            return discrete_hpd(self.masses(), alpha)
        if kind == SetKind.LOWER_TAIL:
            k = int(np.searchsorted(self._cumulative, alpha - 1e-12, side="left"))
            members = tuple(self.labels[: min(k, len(self.labels) - 1) + 1])
            return CredibleSet(kind, alpha, members=members)
        raise ValueError(f"set kind {kind.value} is not defined for discrete posteriors")

    def set_from_samples(self, theta_sorted: np.ndarray, alpha: float, kind: SetKind) -> CredibleSet:
        kind = SetKind.parse(kind)
        if kind != SetKind.DISCRETE_HPD:
            raise ValueError("discrete posteriors estimate discrete_hpd sets from samples")
        return discrete_hpd(empirical_masses(list(theta_sorted)), alpha)

    def mass(self, cset: CredibleSet) -> float:
        if not cset.is_discrete:
            raise ValueError("discrete posterior cannot measure an interval set")
        return float(sum(self.probabilities[self._index[m]] for m in cset.members if m in self._index))


class ModelInterface(ABC):
    """Generative model plus approximation used by the calibration engine."""

    name: str = "model"
    summary_dim: int = 1

    @abstractmethod
    def prior_sampler(self, rng: np.random.Generator) -> Any:
        """Draw φ from the prior."""

    @abstractmethod
    def data_simulator(self, phi: Any, rng: np.random.Generator) -> Any:
        """Draw a dataset from p(·|φ)."""

    @abstractmethod
    def approx_posterior(self, y: Any) -> ApproxPosterior:
        """Build π̃(·|y)."""

    @abstractmethod
    def summary(self, y: Any) -> np.ndarray:
        """Summary vector s(y) of length ``summary_dim``."""

    def exact_posterior(self, y: Any) -> Posterior:
        """Exact posterior π(·|y); only oracle models implement it."""
        raise MissingOracle(f"model {self.name!r} has no exact posterior")

    @property
    def has_oracle(self) -> bool:
        return type(self).exact_posterior is not ModelInterface.exact_posterior

    def describe(self) -> Dict[str, Any]:
        """Parameters recorded in run manifests."""
        return {"model": self.name}
