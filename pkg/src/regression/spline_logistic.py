"""
Additive penalized B-spline logistic regression.

Coverage indicators c_i ∈ {0, 1} are regressed on summaries s_i ∈ R^p:

    logit P(c = 1 | s) = β₀ + Σ_j B_j(s_j) γ_j

Each covariate gets a cubic B-spline basis of dimension k with interior
knots at empirical quantiles; the first column of every block is dropped
because the blocks already sum to one with the intercept. The spline
coefficients carry a ridge penalty λ‖γ‖², the intercept is free.

Fitting is Newton / IRLS:

    (XᵀWX + 2λP) β_new = XᵀW z,   z = η + (c − μ) / w

with λ picked from a log grid by 5-fold cross-validated deviance. Rows are
put into a canonical order first, so the fit does not depend on the order
the bank was supplied in.
"""

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.interpolate import BSpline
from scipy.linalg import solve
from scipy.special import expit, log_expit
from sklearn.model_selection import PredefinedSplit

from errors import ExtrapolationWarning, InsufficientSamples, SeparationError
from utils import dump_json_safe

logger = logging.getLogger(__name__)

DEGREE = 3
DEFAULT_BASIS_DIM = 10
LAMBDA_GRID = np.logspace(-4, 2, 13)
CV_FOLDS = 5
MAX_ITER = 100
TOLERANCE = 1e-8
ETA_LIMIT = 30.0
MIN_ROWS = 10
# Conditioning jitter on the normal equations.
JITTER = math.sqrt(np.finfo(float).eps)


@dataclass
class SplineBasis:
    """
    Per-covariate design: cubic B-spline knot vectors, or a standardized
    linear column when ``basis_dim`` is 0. Constant covariates (None entries)
    contribute no columns.
    """
    basis_dim: int
    lower: np.ndarray
    upper: np.ndarray
    knots: List[Optional[np.ndarray]] = field(default_factory=list)
    center: Optional[np.ndarray] = None
    scale: Optional[np.ndarray] = None

    @classmethod
    def from_data(cls, S: np.ndarray, basis_dim: int = DEFAULT_BASIS_DIM) -> "SplineBasis":
        S = np.asarray(S, dtype=float)
        if basis_dim != 0 and basis_dim < DEGREE + 1:
            raise ValueError(f"basis_dim must be 0 (linear) or >= {DEGREE + 1}, got {basis_dim}")
        lower, upper = S.min(axis=0), S.max(axis=0)
        if basis_dim == 0:
            center = S.mean(axis=0)
            scale = S.std(axis=0)
            return cls(basis_dim=0, lower=lower, upper=upper, center=center, scale=scale)

        knots: List[Optional[np.ndarray]] = []
        n_interior = basis_dim - DEGREE - 1
        for j in range(S.shape[1]):
            lo, hi = lower[j], upper[j]
            if hi <= lo:
                knots.append(None)
                continue
            probs = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
            interior = np.unique(np.quantile(S[:, j], probs)) if n_interior > 0 else np.empty(0)
            interior = interior[(interior > lo) & (interior < hi)]
            knots.append(np.concatenate([np.full(DEGREE + 1, lo), interior, np.full(DEGREE + 1, hi)]))
        return cls(basis_dim=basis_dim, lower=lower, upper=upper, knots=knots)

    @property
    def dim(self) -> int:
        return int(self.lower.size)

    def design(self, S: np.ndarray) -> np.ndarray:
        """Design matrix with a leading intercept column; inputs clipped to the training box."""
        S = np.atleast_2d(np.asarray(S, dtype=float))
        if S.shape[1] != self.dim:
            raise ValueError(f"expected {self.dim} summary columns, got {S.shape[1]}")
        S = np.clip(S, self.lower, self.upper)
        blocks = [np.ones((S.shape[0], 1))]
        if self.basis_dim == 0:
            for j in range(self.dim):
                if self.scale[j] > 0:
                    blocks.append(((S[:, j] - self.center[j]) / self.scale[j])[:, None])
        else:
            for j, t in enumerate(self.knots):
                if t is None:
                    continue
                B = BSpline.design_matrix(S[:, j], t, DEGREE).toarray()
                blocks.append(B[:, 1:])
        return np.hstack(blocks)

    def outside(self, s: np.ndarray) -> np.ndarray:
        """Rows of ``s`` lying outside the training box in any coordinate."""
        s = np.atleast_2d(np.asarray(s, dtype=float))
        return np.any((s < self.lower) | (s > self.upper), axis=1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "basis_dim": self.basis_dim,
            "lower": self.lower,
            "upper": self.upper,
            "knots": list(self.knots),
            "center": self.center,
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SplineBasis":
        opt = lambda v: None if v is None else np.asarray(v, dtype=float)
        return cls(
            basis_dim=int(data["basis_dim"]),
            lower=np.asarray(data["lower"], dtype=float),
            upper=np.asarray(data["upper"], dtype=float),
            knots=[opt(t) for t in data.get("knots", [])],
            center=opt(data.get("center")),
            scale=opt(data.get("scale")),
        )


@dataclass
class RegressionFit:
    """Fitted coefficients (intercept first), λ, coefficient covariance and basis."""
    basis: SplineBasis
    coefficients: np.ndarray
    lam: float
    covariance: np.ndarray
    deviance: float = float("nan")
    iterations: int = 0
    n_rows: int = 0

    def linear_predictor(self, S: np.ndarray) -> np.ndarray:
        return self.basis.design(S) @ self.coefficients

    def to_dict(self) -> Dict[str, Any]:
        return {
            "basis": self.basis.to_dict(),
            "coefficients": self.coefficients,
            "lambda": self.lam,
            "covariance": self.covariance,
            "deviance": self.deviance,
            "iterations": self.iterations,
            "n_rows": self.n_rows,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RegressionFit":
        return cls(
            basis=SplineBasis.from_dict(data["basis"]),
            coefficients=np.asarray(data["coefficients"], dtype=float),
            lam=float(data["lambda"]),
            covariance=np.asarray(data["covariance"], dtype=float),
            deviance=float(data["deviance"]) if data.get("deviance") is not None else float("nan"),
            iterations=int(data.get("iterations", 0)),
            n_rows=int(data.get("n_rows", 0)),
        )


@dataclass
class Prediction:
    """Fitted coverage probability with delta-method standard error."""
    probability: float
    std_error: float
    extrapolated: bool = False


def _deviance(c: np.ndarray, eta: np.ndarray) -> float:
    return float(-2.0 * np.sum(c * log_expit(eta) + (1.0 - c) * log_expit(-eta)))


def _irls(X: np.ndarray, c: np.ndarray, lam: float):
    """Penalized IRLS. Returns (beta, penalized Hessian, deviance, iterations)."""
    m = X.shape[1]
    penalty = np.full(m, 2.0 * lam)
    penalty[0] = 0.0
    penalty += JITTER
    mean = np.clip(c.mean(), 1e-6, 1 - 1e-6)
    beta = np.zeros(m)
    beta[0] = math.log(mean / (1.0 - mean))
    eta = X @ beta
    objective = _deviance(c, eta) + 2.0 * lam * float(np.sum(beta[1:] ** 2))

    for iteration in range(1, MAX_ITER + 1):
        mu = expit(eta)
        w = np.maximum(mu * (1.0 - mu), 1e-12)
        z = eta + (c - mu) / w
        hessian = (X.T * w) @ X + np.diag(penalty)
        beta = solve(hessian, (X.T * w) @ z, assume_a="pos")
        eta = X @ beta
        if not np.isfinite(eta).all() or np.max(np.abs(eta)) > ETA_LIMIT:
            raise SeparationError(f"IRLS diverged: |linear predictor| exceeds {ETA_LIMIT} (lambda={lam:g})")
        new_objective = _deviance(c, eta) + 2.0 * lam * float(np.sum(beta[1:] ** 2))
        change = abs(new_objective - objective) / max(abs(new_objective), 1e-12)
        objective = new_objective
        if change < TOLERANCE:
            break

    mu = expit(eta)
    w = np.maximum(mu * (1.0 - mu), 1e-12)
    hessian = (X.T * w) @ X + np.diag(penalty)
    return beta, hessian, _deviance(c, eta), iteration


def _cv_deviance(X: np.ndarray, c: np.ndarray, lam: float, splitter: PredefinedSplit) -> float:
    total = 0.0
    for train, test in splitter.split():
        if c[train].min() == c[train].max():
            return math.inf
        try:
            beta, _, _, _ = _irls(X[train], c[train], lam)
        except SeparationError:
            return math.inf
        total += _deviance(c[test], X[test] @ beta)
    return total


def _canonical_order(c: np.ndarray, S: np.ndarray) -> np.ndarray:
    keys = [c] + [S[:, j] for j in range(S.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def fit(
    covered: Sequence[float],
    summaries: Sequence[Sequence[float]],
    basis_dim: int = DEFAULT_BASIS_DIM,
    lam: Optional[float] = None,
    lam_grid: Optional[Sequence[float]] = None,
) -> RegressionFit:
    """
    Fit the coverage regression on (c_i, s_i) pairs.

    Args:
        covered: binary coverage indicators, length M
        summaries: summary vectors, shape (M,) or (M, p)
        basis_dim: spline basis dimension per covariate (0 = linear logistic)
        lam: fixed ridge penalty; chosen by cross-validation when None
        lam_grid: candidate penalties for cross-validation

    Raises:
        InsufficientSamples: fewer than 10 rows
        SeparationError: a single response class, or IRLS diverged at every penalty
    """
    c = np.asarray(covered, dtype=float).ravel()
    S = np.asarray(summaries, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    if S.shape[0] != c.size:
        raise ValueError(f"{c.size} responses but {S.shape[0]} summary rows")
    if c.size < MIN_ROWS:
        raise InsufficientSamples(f"need at least {MIN_ROWS} replicates to fit, got {c.size}")
    if not np.isfinite(S).all():
        raise ValueError("summaries must be finite")
    if not np.isin(c, (0.0, 1.0)).all():
        raise ValueError("responses must be 0 or 1")
    if c.min() == c.max():
        raise SeparationError(f"all {c.size} responses equal {int(c[0])}; logistic fit is separated")

    order = _canonical_order(c, S)
    c, S = c[order], S[order]
    basis = SplineBasis.from_data(S, basis_dim)
    X = basis.design(S)

    if lam is None:
        grid = np.asarray(LAMBDA_GRID if lam_grid is None else lam_grid, dtype=float)
        splitter = PredefinedSplit(test_fold=np.arange(c.size) % CV_FOLDS)
        scores = np.array([_cv_deviance(X, c, float(l), splitter) for l in grid])
        if not np.isfinite(scores).any():
            logger.warning("Cross-validation failed at every penalty; using the largest")
            lam = float(grid.max())
        else:
            lam = float(grid[int(np.argmin(scores))])
        logger.info(f"Selected lambda={lam:g} by {CV_FOLDS}-fold CV over {grid.size} values")
    elif lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")

    beta, hessian, deviance, iterations = _irls(X, c, float(lam))
    covariance = np.linalg.inv(hessian)
    covariance = 0.5 * (covariance + covariance.T)
    logger.info(f"Fitted {X.shape[1]} coefficients on {c.size} rows in {iterations} IRLS iterations")
    return RegressionFit(
        basis=basis,
        coefficients=beta,
        lam=float(lam),
        covariance=covariance,
        deviance=deviance,
        iterations=iterations,
        n_rows=int(c.size),
    )


def predict_many(fit_result: RegressionFit, S: Any, warn: bool = True):
    """
    Vectorized prediction.

    Returns:
        (probabilities, standard errors, extrapolated flags) as arrays
    """
    S = np.asarray(S, dtype=float)
    if S.ndim == 1:
        S = S[:, None] if fit_result.basis.dim == 1 else S[None, :]
    if not np.isfinite(S).all():
        raise ValueError("prediction points must be finite")
    flags = fit_result.basis.outside(S)
    if warn and flags.any():
        warnings.warn(
            f"{int(flags.sum())} prediction point(s) outside the training summaries; "
            "simulated data do not enclose the observed data",
            ExtrapolationWarning,
            stacklevel=2,
        )
    X = fit_result.basis.design(S)
    eta = X @ fit_result.coefficients
    se_eta = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", X, fit_result.covariance, X), 0.0))
    mu = expit(eta)
    return mu, mu * (1.0 - mu) * se_eta, flags


def predict(fit_result: RegressionFit, s: Any) -> Prediction:
    """Coverage probability at a single summary vector."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if s.size != fit_result.basis.dim:
        raise ValueError(f"expected summary of length {fit_result.basis.dim}, got {s.size}")
    flags = fit_result.basis.outside(s[None, :])
    if flags[0]:
        logger.warning(f"Summary {s.tolist()} lies outside the training box")
        warnings.warn(
            f"summary {s.tolist()} outside the training summaries' bounding box",
            ExtrapolationWarning,
            stacklevel=2,
        )
    mu, se, _ = predict_many(fit_result, s[None, :], warn=False)
    return Prediction(probability=float(mu[0]), std_error=float(se[0]), extrapolated=bool(flags[0]))


def save_fit(path: Union[str, Path], fit_result: RegressionFit) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        dump_json_safe(fit_result.to_dict(), f)
    return path


def load_fit(path: Union[str, Path]) -> RegressionFit:
    with open(path) as f:
        return RegressionFit.from_dict(json.load(f))
