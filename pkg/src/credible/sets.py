"""
Credible sets from posterior samples, grid densities and discrete masses.

Three constructions are supported:

- Sample based (Ĉ): order statistics of J sorted draws. The quantile estimator
  is θ_(⌈αJ⌉) with ⌈0⌉ clamped to 1. HPD is the shortest window holding
  ⌈αJ⌉ consecutive draws.
- Grid based (C̃): the density is taken as piecewise linear between grid
  nodes, which makes the CDF piecewise quadratic. Tail sets invert that CDF
  exactly; HPD sets are super-level sets {θ: f(θ) ≥ t} with t found by
  bisection, so they can be unions of intervals.
- Discrete: labels ranked by descending mass, ties by canonical label order,
  accumulated until the mass reaches α.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from errors import InsufficientSamples, NonIntegrable

logger = logging.getLogger(__name__)

# Guards ⌈αJ⌉ against α·J landing a hair above an integer.
CEIL_TOLERANCE = 1e-9
DISCRETE_MASS_TOLERANCE = 1e-9


class SetKind(str, Enum):
    """Credible-set constructions."""
    HPD = "hpd"
    EQUAL_TAIL = "equal_tail"
    LOWER_TAIL = "lower_tail"
    DISCRETE_HPD = "discrete_hpd"

    @classmethod
    def parse(cls, value: Any) -> "SetKind":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("-", "_")
        try:
            return cls(text)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown set kind {value!r} (expected one of: {valid})") from None


@dataclass(frozen=True)
class CredibleSet:
    """
    A level-alpha credible set.

    Interval sets hold a sorted union of closed intervals (a single interval
    except for grid HPD sets); ``lo`` may be ``-inf`` for lower-tail sets.
    Discrete sets hold their members in inclusion order.
    """
    kind: SetKind
    alpha: float
    intervals: Tuple[Tuple[float, float], ...] = ()
    members: Optional[Tuple[Hashable, ...]] = None
    _member_set: frozenset = field(default=frozenset(), repr=False, compare=False)

    def __post_init__(self):
        if self.members is not None:
            object.__setattr__(self, "_member_set", frozenset(self.members))
        for lo, hi in self.intervals:
            if not lo <= hi:
                raise ValueError(f"interval endpoints out of order: ({lo}, {hi})")

    @property
    def is_discrete(self) -> bool:
        return self.members is not None

    @property
    def lo(self) -> float:
        if not self.intervals:
            raise ValueError("discrete credible sets have no endpoints")
        return self.intervals[0][0]

    @property
    def hi(self) -> float:
        if not self.intervals:
            raise ValueError("discrete credible sets have no endpoints")
        return self.intervals[-1][1]

    def contains(self, value: Any) -> bool:
        """Membership test; total over labels and reals."""
        if self.members is not None:
            try:
                return value in self._member_set
            except TypeError:
                return False
        x = float(value)
        return any(lo <= x <= hi for lo, hi in self.intervals)

    def __contains__(self, value: Any) -> bool:
        return self.contains(value)

    def __len__(self) -> int:
        if self.members is not None:
            return len(self.members)
        return len(self.intervals)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha <= 1.0) or not math.isfinite(alpha):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return alpha


def ceil_index(level: float, J: int) -> int:
    """1-based order-statistic index ⌈level·J⌉, clamped to at least 1."""
    return max(1, int(math.ceil(level * J - CEIL_TOLERANCE)))


def interval_from_samples(theta: Sequence[float], alpha: float, kind: SetKind) -> CredibleSet:
    """
    Build a credible interval from J sorted posterior draws.

    Args:
        theta: draws sorted ascending
        alpha: nominal level in (0, 1]
        kind: ``EQUAL_TAIL``, ``LOWER_TAIL`` or ``HPD``

    Returns:
        CredibleSet holding one interval

    Raises:
        InsufficientSamples: J < 2 or an order-statistic index exceeds J
        ValueError: unsorted or non-finite draws, invalid alpha or kind
    """
    kind = SetKind.parse(kind)
    alpha = _check_alpha(alpha)
    theta = np.asarray(theta, dtype=float)
    J = theta.size
    if J < 2:
        raise InsufficientSamples(f"need at least 2 posterior draws, got {J}")
    if not np.isfinite(theta).all():
        raise ValueError("posterior draws must be finite")
    if np.any(np.diff(theta) < 0):
        raise ValueError("posterior draws must be sorted ascending")

    k = ceil_index(alpha, J)
    if k > J:
        raise InsufficientSamples(f"index {k} exceeds sample size {J}")

    if kind == SetKind.LOWER_TAIL:
        return CredibleSet(kind, alpha, ((-math.inf, float(theta[k - 1])),))

    if kind == SetKind.EQUAL_TAIL:
        lo_idx = ceil_index((1.0 - alpha) / 2.0, J)
        hi_idx = ceil_index((1.0 + alpha) / 2.0, J)
        if hi_idx > J:
            raise InsufficientSamples(f"upper index {hi_idx} exceeds sample size {J}")
        return CredibleSet(kind, alpha, ((float(theta[lo_idx - 1]), float(theta[hi_idx - 1])),))

    if kind == SetKind.HPD:
        widths = theta[k - 1:] - theta[:J - k + 1]
        start = int(np.argmin(widths))
        return CredibleSet(kind, alpha, ((float(theta[start]), float(theta[start + k - 1])),))

    raise ValueError(f"set kind {kind.value} is not an interval construction")


# ----------------------------------------------------------------------------
# Grid densities
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GridDensity:
    """
    Normalized piecewise-linear density on a strictly increasing grid.

    ``node_cdf`` holds the exact CDF at each node; between nodes the CDF is
    the integral of the linear interpolant.
    """
    grid: np.ndarray
    density: np.ndarray
    node_cdf: np.ndarray

    @classmethod
    def from_values(cls, grid: Sequence[float], density: Sequence[float]) -> "GridDensity":
        grid = np.asarray(grid, dtype=float)
        density = np.asarray(density, dtype=float)
        if grid.ndim != 1 or grid.shape != density.shape or grid.size < 2:
            raise ValueError("grid and density must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.isfinite(density).all() or np.any(density < 0):
            raise NonIntegrable("density must be finite and nonnegative")
        cumulative = cumulative_trapezoid(density, grid, initial=0.0)
        total = cumulative[-1]
        if not math.isfinite(total) or total <= 0.0:
            raise NonIntegrable(f"density total mass is {total}")
        node_cdf = cumulative / total
        node_cdf[-1] = 1.0
        return cls(grid=grid, density=density / total, node_cdf=node_cdf)

    def pdf(self, x: Any) -> np.ndarray:
        return np.interp(x, self.grid, self.density, left=0.0, right=0.0)

    def cdf(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        grid, f = self.grid, self.density
        xc = np.clip(x, grid[0], grid[-1])
        i = np.clip(np.searchsorted(grid, xc, side="right") - 1, 0, grid.size - 2)
        h = grid[i + 1] - grid[i]
        d = xc - grid[i]
        slope = (f[i + 1] - f[i]) / h
        value = self.node_cdf[i] + f[i] * d + 0.5 * slope * d * d
        value = np.clip(value, 0.0, 1.0)
        return np.where(x <= grid[0], 0.0, np.where(x >= grid[-1], 1.0, value))

    def quantile(self, q: Any) -> np.ndarray:
        """Smallest x with F(x) >= q, solved inside the bracketing cell."""
        q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
        grid, f, F = self.grid, self.density, self.node_cdf
        j = np.searchsorted(F, q, side="left")
        i = np.clip(j - 1, 0, grid.size - 2)
        h = grid[i + 1] - grid[i]
        slope = (f[i + 1] - f[i]) / h
        r = np.maximum(q - F[i], 0.0)
        root = np.sqrt(np.maximum(f[i] * f[i] + 2.0 * slope * r, 0.0))
        denom = f[i] + root
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(denom > 0, 2.0 * r / denom, 0.0)
        x = grid[i] + np.clip(d, 0.0, h)
        return np.where(j <= 0, grid[0], x)

    def superlevel_mass(self, t: float) -> float:
        return float(np.sum(self._superlevel_pieces(t)[2]))

    def _superlevel_pieces(self, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-cell sub-interval [a, b] where the interpolant is >= t, and its mass."""
        x0, x1 = self.grid[:-1], self.grid[1:]
        f0, f1 = self.density[:-1], self.density[1:]
        h = x1 - x0
        both = (f0 >= t) & (f1 >= t)
        rising = (f0 < t) & (f1 >= t)
        falling = (f0 >= t) & (f1 < t)

        with np.errstate(divide="ignore", invalid="ignore"):
            cross = x0 + (t - f0) / (f1 - f0) * h
        a = np.where(both | falling, x0, np.where(rising, cross, np.nan))
        b = np.where(both | rising, x1, np.where(falling, cross, np.nan))

        mass = np.zeros_like(h)
        mass[both] = 0.5 * (f0[both] + f1[both]) * h[both]
        mass[rising] = 0.5 * (t + f1[rising]) * (x1[rising] - cross[rising])
        mass[falling] = 0.5 * (t + f0[falling]) * (cross[falling] - x0[falling])
        return a, b, mass

    def superlevel_set(self, t: float) -> Tuple[Tuple[float, float], ...]:
        a, b, _ = self._superlevel_pieces(t)
        keep = ~np.isnan(a)
        merged: List[List[float]] = []
        for lo, hi in zip(a[keep], b[keep]):
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], float(hi))
            else:
                merged.append([float(lo), float(hi)])
        return tuple((lo, hi) for lo, hi in merged)

    def mass_of(self, cset: CredibleSet) -> float:
        """Mass this density assigns to an interval credible set."""
        if cset.is_discrete:
            raise ValueError("grid densities cannot measure discrete sets")
        return float(sum(self.cdf(hi) - self.cdf(lo) for lo, hi in cset.intervals))


def hpd_threshold(density: GridDensity, alpha: float, iterations: int = 200) -> float:
    """Largest density height t whose super-level set still holds mass >= alpha."""
    lo, hi = 0.0, float(np.max(density.density))
    if density.superlevel_mass(hi) >= alpha:
        return hi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if density.superlevel_mass(mid) >= alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(hi, 1.0):
            break
    return lo


def interval_from_grid(
    grid: Sequence[float],
    density: Sequence[float],
    alpha: float,
    kind: SetKind,
) -> CredibleSet:
    """
    Build a credible set from a density tabulated on a grid.

    Args:
        grid: strictly increasing grid
        density: nonnegative, possibly unnormalized density values
        alpha: nominal level
        kind: ``HPD``, ``EQUAL_TAIL`` or ``LOWER_TAIL``

    Raises:
        NonIntegrable: total mass zero or non-finite
    """
    kind = SetKind.parse(kind)
    alpha = _check_alpha(alpha)
    gd = density if isinstance(density, GridDensity) else GridDensity.from_values(grid, density)
    return credible_set_from_density(gd, alpha, kind)


def credible_set_from_density(gd: GridDensity, alpha: float, kind: SetKind) -> CredibleSet:
    if kind == SetKind.LOWER_TAIL:
        return CredibleSet(kind, alpha, ((-math.inf, float(gd.quantile(alpha))),))
    if kind == SetKind.EQUAL_TAIL:
        lo = float(gd.quantile((1.0 - alpha) / 2.0))
        hi = float(gd.quantile((1.0 + alpha) / 2.0))
        return CredibleSet(kind, alpha, ((lo, hi),))
    if kind == SetKind.HPD:
        t = hpd_threshold(gd, alpha)
        return CredibleSet(kind, alpha, gd.superlevel_set(t))
    raise ValueError(f"set kind {kind.value} is not an interval construction")


# ----------------------------------------------------------------------------
# Discrete distributions
# ----------------------------------------------------------------------------

def canonical_key(label: Hashable) -> Tuple[int, Any]:
    """Platform-independent sort key: numbers by value, anything else by text."""
    if isinstance(label, (int, float, np.integer, np.floating)) and not isinstance(label, bool):
        return (0, float(label))
    if isinstance(label, tuple):
        return (1, tuple(canonical_key(part) for part in label))
    return (2, str(label))


def rank_labels(probabilities: Mapping[Hashable, float]) -> List[Hashable]:
    """Labels by descending mass, ties by canonical label order."""
    return [label for label, _ in sorted(
        probabilities.items(), key=lambda kv: (-float(kv[1]), canonical_key(kv[0])))]


def discrete_hpd(probabilities: Mapping[Hashable, float], alpha: float) -> CredibleSet:
    """
    Smallest set of labels holding mass >= alpha.

    Args:
        probabilities: label -> mass, summing to 1 within 1e-9
        alpha: nominal level

    Returns:
        CredibleSet with ``members`` in inclusion order
    """
    alpha = _check_alpha(alpha)
    masses: Dict[Hashable, float] = {k: float(v) for k, v in probabilities.items()}
    values = np.array(list(masses.values()), dtype=float)
    if values.size == 0:
        raise ValueError("empty distribution")
    if not np.isfinite(values).all() or np.any(values < 0):
        raise ValueError("masses must be finite and nonnegative")
    total = float(values.sum())
    if abs(total - 1.0) > DISCRETE_MASS_TOLERANCE:
        raise ValueError(f"masses sum to {total}, expected 1")

    members: List[Hashable] = []
    cumulative = 0.0
    for label in rank_labels(masses):
        mass = masses[label]
        if mass <= 0.0:
            break
        members.append(label)
        cumulative += mass
        if cumulative >= alpha - 1e-12:
            break
    return CredibleSet(SetKind.DISCRETE_HPD, alpha, members=tuple(members))


def empirical_masses(draws: Sequence[Hashable]) -> Dict[Hashable, float]:
    """Relative frequencies of a sample of labels."""
    counts: Dict[Hashable, int] = {}
    for d in draws:
        key = d.item() if isinstance(d, np.generic) else d
        counts[key] = counts.get(key, 0) + 1
    n = len(draws)
    if n == 0:
        raise InsufficientSamples("no draws")
    return {k: c / n for k, c in counts.items()}
