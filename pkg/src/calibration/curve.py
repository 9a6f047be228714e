"""
Coverage curves and nominal-level recalibration.

For a scalar parameter and lower-tail sets, every replicate gives a step
function of the nominal level

    c_i(α) = 𝟙{φ_i ≤ θ_i,(⌈αJ⌉)}

and the weighted average ĉ_y(α) = Σ W_i c_i(α) estimates the distortion
map b_y(α) = F_y(G_y⁻¹(α)). Its left-continuous inverse gives the nominal
level α̃ to request so the realised coverage reaches a target, and ĉ_y ∘ Ĝ_y
recalibrates the approximate posterior CDF.
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from calibration.config import CalibrationConfig
from calibration.engine import (
    ReplicateBank,
    normalized_weights,
    oracle_bank,
    run_importance_sampler,
)
from credible.sets import SetKind, ceil_index
from distances.window import DistanceFunction
from errors import TargetUnreachable
from models.base import ModelInterface, Posterior

logger = logging.getLogger(__name__)

MONOTONE_TOLERANCE = 1e-12


@dataclass
class CoverageCurve:
    """ĉ_y on a grid of nominal levels, nondecreasing with values in [0, 1]."""
    alphas: np.ndarray
    c_hat: np.ndarray
    sigma: Optional[np.ndarray] = None
    ess: Optional[float] = None
    m_used: int = 0

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.c_hat = np.asarray(self.c_hat, dtype=float)
        if self.alphas.shape != self.c_hat.shape or self.alphas.ndim != 1 or self.alphas.size == 0:
            raise ValueError("alphas and c_hat must be 1-d arrays of equal length")
        if np.any(np.diff(self.alphas) <= 0):
            raise ValueError("alpha grid must be strictly increasing")
        if np.any(self.c_hat < -MONOTONE_TOLERANCE) or np.any(self.c_hat > 1 + MONOTONE_TOLERANCE):
            raise ValueError("coverage values must lie in [0, 1]")
        if np.any(np.diff(self.c_hat) < -MONOTONE_TOLERANCE):
            raise ValueError("coverage curve must be nondecreasing")
        self.c_hat = np.clip(self.c_hat, 0.0, 1.0)

    def __call__(self, alpha: Any) -> np.ndarray:
        return np.interp(alpha, self.alphas, self.c_hat)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"alpha": self.alphas, "c_hat": self.c_hat})


def alpha_grid(points: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def step_matrix(bank: ReplicateBank, alphas: np.ndarray, exact_sets: bool = False) -> np.ndarray:
    """
    Indicators c_i(α_k), shape (M, K).

    Sample sets use the stored rank r_i = #{θ_ij < φ_i}: φ ≤ θ_(k) iff
    r_i < k. Exact sets use G(φ_i) ≤ α. The ends are pinned to the
    empty set (α = 0) and the whole support (α = 1).
    """
    M, K = len(bank), alphas.size
    steps = np.zeros((M, K), dtype=float)
    interior = (alphas > 0.0) & (alphas < 1.0)
    if exact_sets:
        pit = np.array([r.pit for r in bank.replicates], dtype=float)
        if np.isnan(pit).any():
            raise ValueError("exact-set curves need a continuous parameter")
        steps[:, interior] = pit[:, None] <= alphas[None, interior]
    else:
        ranks = np.array([r.theta_rank for r in bank.replicates], dtype=float)
        if np.isnan(ranks).any():
            raise ValueError("bank carries no posterior-sample ranks")
        J = bank.J
        k = np.array([min(ceil_index(a, J), J) for a in alphas[interior]])
        steps[:, interior] = ranks[:, None] < k[None, :]
    steps[:, alphas >= 1.0] = 1.0
    return steps


def curve_from_bank(
    bank: ReplicateBank,
    points: int = 512,
    exact_sets: bool = False,
    weighted: bool = True,
) -> CoverageCurve:
    """Weighted average of the replicates' step functions on a uniform α grid."""
    if len(bank) == 0:
        raise ValueError("cannot build a coverage curve from an empty bank")
    alphas = alpha_grid(points)
    steps = step_matrix(bank, alphas, exact_sets)
    if weighted and bank.replicates[0].log_weight is not None:
        raw, W = normalized_weights(bank)
        ess_value = float(raw.sum() ** 2 / np.sum(raw * raw))
    else:
        W = np.full(len(bank), 1.0 / len(bank))
        ess_value = float(len(bank))
    c_hat = W @ steps
    sigma = np.sqrt(np.sum((W * W)[:, None] * (steps - c_hat[None, :]) ** 2, axis=0))
    # Summation error can break exact monotonicity and the endpoints by an ulp.
    c_hat = np.maximum.accumulate(np.clip(c_hat, 0.0, 1.0))
    c_hat[alphas <= 0.0] = 0.0
    c_hat[alphas >= 1.0] = 1.0
    return CoverageCurve(alphas, c_hat, sigma=sigma, ess=ess_value, m_used=len(bank))


def _lower_tail(cfg: CalibrationConfig) -> CalibrationConfig:
    if cfg.set_kind != SetKind.LOWER_TAIL:
        logger.info(f"Coverage curves use lower-tail sets; ignoring set_kind={cfg.set_kind.value}")
        return cfg.with_(set_kind=SetKind.LOWER_TAIL)
    return cfg


def coverage_curve(
    model: ModelInterface,
    y: Any,
    cfg: CalibrationConfig,
    dist: DistanceFunction,
) -> CoverageCurve:
    """
    Importance-sampled coverage curve at the observed data.

    Raises:
        WindowTimeout, DegenerateWeights: as run_importance_sampler
    """
    cfg = _lower_tail(cfg)
    _, bank = run_importance_sampler(model, y, cfg, dist)
    return curve_from_bank(bank, cfg.curve_points, cfg.exact_sets)


def oracle_coverage_curve(model: ModelInterface, y: Any, cfg: CalibrationConfig) -> CoverageCurve:
    """Equal-weight curve from exact-posterior replicates."""
    cfg = _lower_tail(cfg)
    return curve_from_bank(oracle_bank(model, y, cfg), cfg.curve_points, cfg.exact_sets, weighted=False)


def distortion_curve(exact: Posterior, approx: Posterior, alphas: Sequence[float]) -> CoverageCurve:
    """b_y(α) = F_y(G_y⁻¹(α)) from the two posteriors."""
    alphas = np.asarray(alphas, dtype=float)
    values = np.asarray(exact.cdf(approx.quantile(alphas)), dtype=float)
    values = np.maximum.accumulate(np.clip(values, 0.0, 1.0))
    return CoverageCurve(alphas, values)


def invert_nominal_level(curve: CoverageCurve, target: float) -> float:
    """
    Smallest grid level α with ĉ_y(α) ≥ target.

    Raises:
        TargetUnreachable: target above the curve's maximum
    """
    target = float(target)
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    hits = np.nonzero(curve.c_hat >= target - MONOTONE_TOLERANCE)[0]
    if hits.size == 0:
        raise TargetUnreachable(
            f"target {target} exceeds the curve maximum {float(curve.c_hat.max()):.6g}"
        )
    return float(curve.alphas[hits[0]])


def recalibrate_cdf(curve: CoverageCurve, g_hat: Any) -> np.ndarray:
    """ĉ_y ∘ ĝ_y, linearly interpolated on the curve grid."""
    g = np.asarray(g_hat, dtype=float)
    if np.any(g < 0.0) or np.any(g > 1.0) or not np.isfinite(g).all():
        raise ValueError("CDF values must lie in [0, 1]")
    return np.interp(g, curve.alphas, curve.c_hat)


def recalibrated_quantile(curve: CoverageCurve, theta_sorted: Sequence[float], target: float = 0.5) -> float:
    """θ_(⌈α̃J⌉) with α̃ = invert_nominal_level(curve, target)."""
    theta = np.asarray(theta_sorted, dtype=float)
    if theta.size == 0:
        raise ValueError("no posterior draws")
    level = invert_nominal_level(curve, target)
    return float(theta[min(ceil_index(level, theta.size), theta.size) - 1])
