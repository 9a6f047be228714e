"""
Plot-ready data for the standard calibration figures.

Each builder returns pandas DataFrames; rendering is left to external tools.

    fig1-topleft  (normal-regression)  regression estimate of b(y) against the
                                       closed form, per v
    fig1-bottom   (normal-window)      IS estimates of b(y) at several windows,
                                       per seed
    fig3-left     (ising-regression)   Ising bank: binned empirical coverage and
                                       the fitted curve over f(y; E_F)
    fig3-right    (ising-curve)        Ising coverage curve at the observed
                                       lattice with inverse-map targets

The names in parentheses are accepted as aliases.
"""

import logging
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from calibration.config import CalibrationConfig
from calibration.curve import curve_from_bank, invert_nominal_level, distortion_curve
from calibration.engine import (
    fit_bank,
    operational_coverage,
    run_importance_sampler,
    run_regression_bank,
)
from credible.sets import SetKind
from distances.window import DistanceFunction, SummaryDistance, KSDistance
from errors import TargetUnreachable
from models.ising import IsingLattice, IsingModel
from models.tempered_normal import TemperedNormalModel, exact_coverage
from regression.spline_logistic import predict_many

logger = logging.getLogger(__name__)

FIGURE_IDS = ("fig1-topleft", "fig1-bottom", "fig3-left", "fig3-right")
FIGURE_ALIASES = {
    "normal-regression": "fig1-topleft",
    "normal-window": "fig1-bottom",
    "ising-regression": "fig3-left",
    "ising-curve": "fig3-right",
}


def resolve_figure_id(name: str) -> str:
    """Canonical figure id for an id or alias."""
    if name in FIGURE_IDS:
        return name
    try:
        return FIGURE_ALIASES[name]
    except KeyError:
        raise ValueError(f"unknown figure id {name!r}") from None
BIN_SIZE = 50


def normal_regression(
    cfg: CalibrationConfig,
    vs: Sequence[float] = (0.0, 0.5, 1.0),
    y_grid: Optional[Sequence[float]] = None,
) -> Dict[str, pd.DataFrame]:
    """Fitted coverage b̂(y) and closed-form b(y) on a y grid for each v."""
    ys = np.linspace(-3.0, 3.0, 25) if y_grid is None else np.asarray(y_grid, dtype=float)
    frames = []
    for v in vs:
        model = TemperedNormalModel(v)
        bank = run_regression_bank(model, cfg)
        fitted = fit_bank(bank, cfg.basis_dim)
        prob, se, outside = predict_many(fitted, ys[:, None], warn=False)
        truth = [exact_coverage(y, cfg.alpha, v) for y in ys]
        frames.append(pd.DataFrame({
            "v": v, "y": ys, "b_true": truth, "b_hat": prob, "se": se, "extrapolated": outside,
        }))
        logger.info(f"fig1-topleft: v={v} max |b_hat - b| = {np.max(np.abs(prob - truth)):.4f}")
    return {"fig1_topleft": pd.concat(frames, ignore_index=True)}


def normal_window(
    cfg: CalibrationConfig,
    v: float = 0.0,
    alphas: Sequence[float] = (0.5, 0.9),
    rhos: Sequence[float] = (1.0, 0.3),
    ys: Sequence[float] = (0.0, 1.0, 2.0),
    seeds: int = 5,
    dist: Optional[DistanceFunction] = None,
) -> Dict[str, pd.DataFrame]:
    """IS estimates per (alpha, rho, y, seed) with the closed-form target."""
    model = TemperedNormalModel(v)
    dist = dist or SummaryDistance()
    rows = []
    for alpha in alphas:
        for rho in rhos:
            for y in ys:
                for k in range(seeds):
                    run_cfg = cfg.with_(alpha=alpha, rho=rho, master_seed=cfg.master_seed + k)
                    estimate, bank = run_importance_sampler(model, y, run_cfg, dist, raise_on_timeout=False)
                    rows.append({
                        "v": v, "alpha": alpha, "rho": rho, "y": y, "seed": run_cfg.master_seed,
                        "c_hat": None if estimate is None else estimate.c_hat,
                        "sigma_hat": None if estimate is None else estimate.sigma_hat,
                        "ess": None if estimate is None else estimate.ess,
                        "m_used": len(bank),
                        "b_true": exact_coverage(y, alpha, v),
                    })
    return {"fig1_bottom": pd.DataFrame(rows)}


def binned_coverage(summaries: np.ndarray, covered: np.ndarray, bin_size: int = BIN_SIZE) -> pd.DataFrame:
    """Consecutive bins of ``bin_size`` points after sorting by the summary."""
    order = np.argsort(summaries, kind="stable")
    s, c = summaries[order], covered[order]
    rows = []
    for start in range(0, s.size, bin_size):
        stop = min(start + bin_size, s.size)
        rows.append({"s_mean": float(s[start:stop].mean()), "coverage": float(c[start:stop].mean()),
                     "count": stop - start})
    return pd.DataFrame(rows)


def ising_regression(
    model: IsingModel,
    cfg: CalibrationConfig,
    bin_size: int = BIN_SIZE,
) -> Dict[str, pd.DataFrame]:
    """Binned bank coverage and the fitted regression over the sufficient statistic."""
    bank = run_regression_bank(model, cfg)
    fitted = fit_bank(bank, cfg.basis_dim)
    s = bank.summaries[:, 0]
    bins = binned_coverage(s, bank.covered, bin_size)
    s_grid = np.arange(int(s.min()), int(s.max()) + 1, dtype=float)
    prob, se, _ = predict_many(fitted, s_grid[:, None], warn=False)
    exact = [operational_coverage(model.approx_posterior_at(int(v)), model.exact_posterior_at(int(v)),
                                  cfg.alpha, cfg.set_kind) for v in s_grid]
    fit_frame = pd.DataFrame({"s": s_grid, "c_hat": prob, "se": se, "b_exact": exact})
    bins["c_fit"] = predict_many(fitted, bins["s_mean"].to_numpy()[:, None], warn=False)[0]
    return {"fig3_left_bins": bins, "fig3_left_fit": fit_frame}


def ising_curve(
    model: IsingModel,
    y: IsingLattice,
    cfg: CalibrationConfig,
    dist: Optional[DistanceFunction] = None,
    targets: Sequence[float] = (0.5, 0.9, 0.95),
) -> Dict[str, pd.DataFrame]:
    """IS coverage curve at ``y``, the exact distortion curve, and the inverse map."""
    cfg = cfg.with_(set_kind=SetKind.LOWER_TAIL)
    _, bank = run_importance_sampler(model, y, cfg, dist or KSDistance())
    curve = curve_from_bank(bank, cfg.curve_points, cfg.exact_sets)
    exact = distortion_curve(model.exact_posterior(y), model.approx_posterior(y), curve.alphas)
    curve_frame = curve.to_frame()
    curve_frame["sigma"] = curve.sigma
    curve_frame["b_exact"] = exact.c_hat
    rows = []
    for t in targets:
        try:
            rows.append({"target": t, "alpha_adjusted": invert_nominal_level(curve, t)})
        except TargetUnreachable:
            rows.append({"target": t, "alpha_adjusted": np.nan})
    return {"fig3_right_curve": curve_frame, "fig3_right_inverse": pd.DataFrame(rows)}
