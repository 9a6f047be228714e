"""
Tempered-normal model with a closed-form oracle.

    φ ~ N(0, 1),   y | φ ~ N(φ, 1)

The exact posterior is N(y/2, 1/2). The approximation tempers the likelihood
by a power v ≥ 0:

    π̃(θ|y) ∝ N(y; θ, 1)^v N(θ; 0, 1) = N(θ; vy/(1+v), 1/(1+v))

v = 1 recovers the exact posterior, v = 0 returns the prior. The symmetric
level-α set is [B₋, B₊] = vy/(1+v) ± Z_α/√(1+v) with Z_α = Φ⁻¹((1+α)/2), so
the operational coverage has the closed form

    b(y) = Φ(√2(B₊ − y/2)) − Φ(√2(B₋ − y/2))

Importance weights 1/p̃(y|φ) have finite variance only for v < 2.
"""

import math
from typing import Any, Dict

import numpy as np
from scipy.special import ndtr, ndtri

from credible.sets import CredibleSet, SetKind
from errors import ConfigError
from models.base import ApproxPosterior, ModelInterface

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def z_alpha(alpha: float) -> float:
    """Half-width multiplier of the central level-α normal interval."""
    return float(ndtri((1.0 + alpha) / 2.0))


class NormalPosterior(ApproxPosterior):
    """N(mean, var) posterior for dataset ``y`` under likelihood power ``v``."""

    def __init__(self, mean: float, var: float, y: float = 0.0, v: float = 1.0):
        if not var > 0:
            raise ValueError(f"variance must be positive, got {var}")
        self.mean = float(mean)
        self.var = float(var)
        self.sd = math.sqrt(self.var)
        self.y = float(y)
        self.v = float(v)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return self.mean + self.sd * rng.standard_normal(size)

    def log_density(self, theta: Any) -> np.ndarray:
        z = (np.asarray(theta, dtype=float) - self.mean) / self.sd
        return -0.5 * z * z - math.log(self.sd) - LOG_SQRT_2PI

    def cdf(self, theta: Any) -> np.ndarray:
        return ndtr((np.asarray(theta, dtype=float) - self.mean) / self.sd)

    def quantile(self, q: Any) -> np.ndarray:
        return self.mean + self.sd * ndtri(np.asarray(q, dtype=float))

    def credible_set(self, alpha: float, kind: SetKind = SetKind.EQUAL_TAIL) -> CredibleSet:
        kind = SetKind.parse(kind)
        if kind in (SetKind.EQUAL_TAIL, SetKind.HPD):
            half = z_alpha(alpha) * self.sd
            return CredibleSet(kind, alpha, ((self.mean - half, self.mean + half),))
        if kind == SetKind.LOWER_TAIL:
            return CredibleSet(kind, alpha, ((-math.inf, float(self.quantile(alpha))),))
        raise ValueError(f"set kind {kind.value} is not defined for a normal posterior")

    def log_likelihood(self, phi: Any) -> np.ndarray:
        """log N(y; φ, 1)^v"""
        r = self.y - np.asarray(phi, dtype=float)
        return self.v * (-0.5 * r * r - LOG_SQRT_2PI)


class TemperedNormalModel(ModelInterface):
    """Normal location model approximated by a tempered likelihood."""

    name = "tempered-normal"
    summary_dim = 1

    def __init__(self, v: float = 1.0):
        v = float(v)
        if not math.isfinite(v) or v < 0:
            raise ConfigError(f"tempering power v must be >= 0, got {v}")
        self.v = v

    @property
    def clt_safe(self) -> bool:
        """Importance weights have finite second moment."""
        return self.v < 2.0

    def prior_sampler(self, rng: np.random.Generator) -> float:
        return float(rng.standard_normal())

    def data_simulator(self, phi: float, rng: np.random.Generator) -> float:
        return float(phi + rng.standard_normal())

    def approx_posterior(self, y: float) -> NormalPosterior:
        y = float(y)
        return NormalPosterior(self.v * y / (1.0 + self.v), 1.0 / (1.0 + self.v), y=y, v=self.v)

    def exact_posterior(self, y: float) -> NormalPosterior:
        y = float(y)
        return NormalPosterior(y / 2.0, 0.5, y=y, v=1.0)

    def summary(self, y: float) -> np.ndarray:
        return np.array([float(y)])

    def describe(self) -> Dict[str, Any]:
        return {"model": self.name, "v": self.v}


def exact_coverage(y: float, alpha: float, v: float) -> float:
    """Closed-form operational coverage b(y) of the symmetric tempered set."""
    mean = v * y / (1.0 + v)
    half = z_alpha(alpha) / math.sqrt(1.0 + v)
    b_plus, b_minus = mean + half, mean - half
    root2 = math.sqrt(2.0)
    return float(ndtr(root2 * (b_plus - y / 2.0)) - ndtr(root2 * (b_minus - y / 2.0)))
