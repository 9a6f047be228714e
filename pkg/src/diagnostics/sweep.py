"""
Window-radius sweep.

One importance-sampler bank is drawn at the widest radius and re-windowed
at each smaller radius, so differences between rows come from the window
alone. m_used is therefore nonincreasing down the table.
"""

import logging
import math
from typing import Any, Sequence

import numpy as np
import pandas as pd

from calibration.config import CalibrationConfig
from calibration.engine import ReplicateBank, run_importance_sampler, window_estimate
from distances.window import DistanceFunction
from models.base import ModelInterface

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["rho", "m_used", "ess", "c_hat", "sigma_hat", "empty"]


def _check_grid(rho_grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(rho_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("rho grid must be a nonempty list")
    if np.isnan(grid).any() or np.any(grid <= 0):
        raise ValueError("rho values must be positive")
    if np.any(np.diff(grid) > 0):
        raise ValueError("rho grid must be descending")
    return grid


def sweep_bank(bank: ReplicateBank, rho_grid: Sequence[float]) -> pd.DataFrame:
    """Re-window a stored bank at every radius in ``rho_grid``."""
    rows = []
    for rho in _check_grid(rho_grid):
        estimate = window_estimate(bank, rho)
        if estimate is None:
            logger.warning(f"No replicates within rho={rho:g}")
            rows.append({"rho": rho, "m_used": 0, "ess": 0.0, "c_hat": math.nan,
                         "sigma_hat": math.nan, "empty": True})
            continue
        rows.append({"rho": rho, "m_used": estimate.m_used, "ess": estimate.ess,
                     "c_hat": estimate.c_hat, "sigma_hat": estimate.sigma_hat, "empty": False})
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def rho_sweep(
    model: ModelInterface,
    y: Any,
    cfg: CalibrationConfig,
    dist: DistanceFunction,
    rho_grid: Sequence[float],
) -> pd.DataFrame:
    """
    Table of (rho, m_used, ess, c_hat, sigma_hat, empty) over a descending grid.

    Raises:
        WindowTimeout: the widest radius could not fill the bank
    """
    grid = _check_grid(rho_grid)
    _, bank = run_importance_sampler(model, y, cfg.with_(rho=float(grid[0])), dist)
    return sweep_bank(bank, grid)
