"""Posteriors tabulated on a parameter grid."""

import math
from typing import Any, Optional, Sequence

import numpy as np

from credible.sets import CredibleSet, GridDensity, SetKind, credible_set_from_density
from errors import DegenerateDensity
from models.base import ApproxPosterior


class GridPosterior(ApproxPosterior):
    """
    Posterior given by log-density values on a grid.

    The log density is max-shifted before exponentiation and normalized by
    the trapezoid rule. ``log_likelihood_values`` (log p̃(y|φ) on the same
    grid) is optional and interpolated linearly when evaluated off-grid.
    """

    def __init__(
        self,
        grid: Sequence[float],
        log_density_values: Sequence[float],
        log_likelihood_values: Optional[Sequence[float]] = None,
    ):
        grid = np.asarray(grid, dtype=float)
        logd = np.asarray(log_density_values, dtype=float)
        if logd.shape != grid.shape:
            raise ValueError("log density must match the grid")
        top = np.max(logd)
        if not math.isfinite(top):
            raise DegenerateDensity("log density has no finite maximum")
        dens = np.exp(logd - top)
        if not np.any(dens > 0):
            raise DegenerateDensity("all grid masses underflow")
        self.table = GridDensity.from_values(grid, dens)
        self.grid = self.table.grid
        self._loglik = None
        if log_likelihood_values is not None:
            self._loglik = np.asarray(log_likelihood_values, dtype=float)
            if self._loglik.shape != grid.shape:
                raise ValueError("log likelihood must match the grid")

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return self.table.quantile(rng.random(size))

    def log_density(self, theta: Any) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.table.pdf(theta))

    def pdf(self, theta: Any) -> np.ndarray:
        return self.table.pdf(theta)

    def cdf(self, theta: Any) -> np.ndarray:
        return self.table.cdf(theta)

    def quantile(self, q: Any) -> np.ndarray:
        return self.table.quantile(q)

    def credible_set(self, alpha: float, kind: SetKind = SetKind.HPD) -> CredibleSet:
        return credible_set_from_density(self.table, float(alpha), SetKind.parse(kind))

    def mass(self, cset: CredibleSet) -> float:
        return min(max(self.table.mass_of(cset), 0.0), 1.0)

    def support_grid(self) -> np.ndarray:
        return self.grid

    def support_bounds(self, tail: float = 1e-10):
        return float(self.grid[0]), float(self.grid[-1])

    def log_likelihood(self, phi: Any) -> np.ndarray:
        if self._loglik is None:
            raise NotImplementedError("this posterior carries no likelihood")
        return np.interp(phi, self.grid, self._loglik)
