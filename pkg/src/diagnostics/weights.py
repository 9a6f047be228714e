"""
Importance-weight health metrics.

ESS = (Σw)² / Σw²
    Equal-weight sample size with the same variance; lies in [1, M].

σ̂ = √(Σ W_i² (c_i − ĉ)²),  W normalized
    Standard error of the self-normalized estimate ĉ = Σ W_i c_i.

V̂ = M⁻¹ Σ (k̂ w̃_i)² (c_i − d̂)²,  k̂ = M / Σ w̃_i
    Empirical asymptotic variance: √M(ĉ − d) → N(0, V) when the weights
    have a finite second moment. V̂ / M should track Var(ĉ) across seeds.
"""

from typing import Sequence

import numpy as np
from scipy.stats import mannwhitneyu

from errors import AllZeroWeights


def _as_weights(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=float).ravel()
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    return w


def ess(weights: Sequence[float]) -> float:
    """Effective sample size of nonnegative weights."""
    w = _as_weights(weights)
    total = float(w.sum())
    if w.size == 0 or total <= 0.0:
        raise AllZeroWeights("effective sample size needs at least one positive weight")
    return total * total / float(np.sum(w * w))


def weighted_sigma(weights: Sequence[float], c: Sequence[float], c_hat: float) -> float:
    """σ̂ for normalized weights."""
    w = _as_weights(weights)
    c = np.asarray(c, dtype=float).ravel()
    if w.shape != c.shape:
        raise ValueError("weights and indicators differ in length")
    return float(np.sqrt(np.sum(w * w * (c - c_hat) ** 2)))


def clt_variance(weights: Sequence[float], c: Sequence[float], d_hat: float) -> float:
    """V̂ from unnormalized weights."""
    w = _as_weights(weights)
    c = np.asarray(c, dtype=float).ravel()
    if w.shape != c.shape:
        raise ValueError("weights and indicators differ in length")
    M = w.size
    total = float(w.sum())
    if M == 0 or total <= 0.0:
        raise AllZeroWeights("CLT variance needs at least one positive weight")
    kw = (M / total) * w
    return float(np.mean(kw * kw * (c - d_hat) ** 2))


def marginal_rank_test(phis: Sequence[float], draws: Sequence[float]) -> float:
    """
    Two-sided Mann-Whitney p-value comparing pooled φ_(i) with one θ per replicate.

    Under the joint law φ ~ π, y ~ p(·|φ), θ ~ π̃(·|y) both pools share the
    prior marginal whenever π̃ averages back to the prior, so this test cannot
    see approximation error that cancels on average.
    """
    phis = np.asarray(phis, dtype=float).ravel()
    draws = np.asarray(draws, dtype=float).ravel()
    if phis.size == 0 or draws.size == 0:
        raise ValueError("rank test needs two nonempty samples")
    return float(mannwhitneyu(phis, draws, alternative="two-sided").pvalue)
