"""
Toy model with a discrete parameter, used to exercise discrete HPD sets and
the ranked KS distance.

    φ ~ Uniform{0, ..., K−1},   y | φ ~ Binomial(n, (φ+1)/(K+1))

The approximation tempers the binomial likelihood by a power v.
"""

from typing import Any, Dict

import numpy as np
from scipy.stats import binom

from errors import ConfigError
from models.base import DiscretePosterior, ModelInterface


class BinomialLabelModel(ModelInterface):
    """Binomial success probability indexed by a finite label."""

    name = "binomial-labels"
    summary_dim = 1

    def __init__(self, K: int = 5, n: int = 20, v: float = 1.0):
        if K < 2:
            raise ConfigError(f"need at least 2 labels, got K={K}")
        if n < 1:
            raise ConfigError(f"need at least 1 trial, got n={n}")
        if v < 0:
            raise ConfigError(f"tempering power v must be >= 0, got {v}")
        self.K = int(K)
        self.n = int(n)
        self.v = float(v)
        self.labels = list(range(self.K))
        self.success = (np.arange(self.K) + 1.0) / (self.K + 1.0)

    def _posterior(self, y: int, power: float) -> DiscretePosterior:
        loglik = power * binom.logpmf(int(y), self.n, self.success)
        return DiscretePosterior(self.labels, loglik, loglik=loglik)

    def prior_sampler(self, rng: np.random.Generator) -> int:
        return int(rng.integers(0, self.K))

    def data_simulator(self, phi: int, rng: np.random.Generator) -> int:
        return int(rng.binomial(self.n, self.success[int(phi)]))

    def approx_posterior(self, y: int) -> DiscretePosterior:
        return self._posterior(y, self.v)

    def exact_posterior(self, y: int) -> DiscretePosterior:
        return self._posterior(y, 1.0)

    def summary(self, y: int) -> np.ndarray:
        return np.array([float(y)])

    def describe(self) -> Dict[str, Any]:
        return {"model": self.name, "K": self.K, "n": self.n, "v": self.v}
