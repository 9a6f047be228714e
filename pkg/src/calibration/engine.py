"""
Coverage calibration engine.

Estimators of how often an approximate credible set covers the truth:

- Oracle (run_oracle): φ ~ π(·|y), θ ~ π̃(·|y); the mean of 𝟙{φ ∈ Ĉ_y}.
  Needs the exact posterior, so only usable on oracle models.
- Regression (run_regression_bank + fit_bank + estimate_coverage_at): draw
  φ from the prior and y' from the model, record whether φ lies in the set
  built from π̃(·|y'), then regress the indicator on s(y') and read the
  fitted probability off at s(y).
- Importance sampling (run_importance_sampler): propose φ ~ π̃(·|y),
  simulate y', keep the pair when δ(y', y) ≤ ρ, weight by 1/p̃(y|φ). The
  weighted mean of the indicators estimates coverage at data near y.

Replicates are farmed to a thread pool. Replicate i uses its own RNG
substream and draws in the fixed order φ, y', θ, so a bank is bitwise
identical for any worker count.
"""

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from calibration.config import CalibrationConfig
from calibration.rng import REFERENCE_STREAM, substream
from credible.sets import SetKind, ceil_index
from diagnostics.weights import clt_variance, ess, weighted_sigma
from distances.window import DistanceFunction
from errors import (
    DegenerateWeights,
    MissingOracle,
    SimulatorFailure,
    WindowTimeout,
)
from models.base import ApproxPosterior, ModelInterface, Posterior
from regression.spline_logistic import RegressionFit, fit as fit_regression, predict

logger = logging.getLogger(__name__)


@dataclass
class Replicate:
    """
    One calibration draw.

    ``theta`` is kept only on request; ``theta_rank`` (the number of draws
    strictly below φ) and ``theta_draw`` (the first draw) are always kept
    and are all that coverage curves and the marginal rank test need.
    ``pit`` is G_{y'}(φ) under the approximate posterior.
    """
    index: int
    phi: Any
    dataset: Any
    covered: int
    summary: np.ndarray
    theta: Optional[np.ndarray] = None
    theta_rank: Optional[int] = None
    theta_draw: Optional[Any] = None
    pit: Optional[float] = None
    weight: Optional[float] = None
    log_weight: Optional[float] = None
    distance: Optional[float] = None
    proposals: int = 1


@dataclass
class ReplicateBank:
    """Ordered replicates plus how they were produced."""
    replicates: List[Replicate]
    algorithm: str
    master_seed: int
    J: int = 0
    rho: Optional[float] = None
    proposals: int = 0
    timed_out: bool = False
    requested: int = 0

    def __len__(self) -> int:
        return len(self.replicates)

    def __iter__(self) -> Iterator[Replicate]:
        return iter(self.replicates)

    def __getitem__(self, i: int) -> Replicate:
        return self.replicates[i]

    @property
    def covered(self) -> np.ndarray:
        return np.array([r.covered for r in self.replicates], dtype=float)

    @property
    def phis(self) -> np.ndarray:
        return np.array([r.phi for r in self.replicates])

    @property
    def summaries(self) -> np.ndarray:
        if not self.replicates:
            return np.empty((0, 0))
        return np.vstack([np.atleast_1d(r.summary) for r in self.replicates]).astype(float)

    @property
    def weights(self) -> Optional[np.ndarray]:
        if not self.replicates or self.replicates[0].weight is None:
            return None
        return np.array([r.weight for r in self.replicates], dtype=float)

    @property
    def distances(self) -> Optional[np.ndarray]:
        if not self.replicates or self.replicates[0].distance is None:
            return None
        return np.array([r.distance for r in self.replicates], dtype=float)

    @property
    def theta_draws(self) -> np.ndarray:
        return np.array([r.theta_draw for r in self.replicates])

    def subset(self, keep: Sequence[bool]) -> "ReplicateBank":
        kept = [r for r, k in zip(self.replicates, keep) if k]
        return ReplicateBank(kept, self.algorithm, self.master_seed, self.J, self.rho,
                             self.proposals, self.timed_out, self.requested)


@dataclass
class CoverageEstimate:
    """ĉ with its standard error, effective sample size and window count."""
    c_hat: float
    sigma_hat: float
    ess: float
    m_used: int
    clt_variance: Optional[float] = None
    extrapolated: bool = False

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "c_hat": self.c_hat,
            "sigma_hat": self.sigma_hat,
            "ess": self.ess,
            "m_used": self.m_used,
        }
        if self.clt_variance is not None:
            data["clt_variance"] = self.clt_variance
        if self.extrapolated:
            data["extrapolated"] = True
        return data


# ----------------------------------------------------------------------------
# Replicate farm
# ----------------------------------------------------------------------------

def farm(task: Callable[[int], Any], count: int, workers: int = 1) -> List[Any]:
    """
    Run ``task(i)`` for i in range(count); results come back in index order.

    Exceptions from model code are re-raised as SimulatorFailure carrying
    the replicate index.
    """
    def guarded(i: int) -> Any:
        try:
            return task(i)
        except SimulatorFailure:
            raise
        except Exception as exc:
            raise SimulatorFailure(i, exc) from exc

    if workers > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(guarded, range(count)))
    return [guarded(i) for i in range(count)]


class ProposalBudget:
    """Thread-safe count of proposals left for one sampler run."""

    def __init__(self, total: int):
        self.total = int(total)
        self.spent = 0
        self._lock = threading.Lock()

    def take(self) -> bool:
        """Claim one proposal; False once the budget is spent."""
        with self._lock:
            if self.spent >= self.total:
                return False
            self.spent += 1
            return True


def _sorted_draws(posterior: Posterior, J: int, rng: np.random.Generator) -> Tuple[np.ndarray, Any]:
    draws = np.asarray(posterior.sample(J, rng))
    return np.sort(draws, kind="stable"), _scalar(draws[0])


def _scalar(value: Any) -> Any:
    return value.item() if isinstance(value, np.generic) else value


def _coverage(
    posterior: Posterior,
    phi: Any,
    theta_sorted: Optional[np.ndarray],
    cfg: CalibrationConfig,
) -> int:
    if not cfg.exact_sets and theta_sorted is not None and cfg.set_kind == SetKind.LOWER_TAIL:
        # φ ≤ θ_(⌈αJ⌉); also defined for J = 1
        return int(phi <= theta_sorted[ceil_index(cfg.alpha, theta_sorted.size) - 1])
    if cfg.exact_sets or theta_sorted is None:
        cset = posterior.credible_set(cfg.alpha, cfg.set_kind)
    else:
        cset = posterior.set_from_samples(theta_sorted, cfg.alpha, cfg.set_kind)
    return int(cset.contains(phi))


def _rank(theta_sorted: Optional[np.ndarray], phi: Any) -> Optional[int]:
    if theta_sorted is None:
        return None
    return int(np.searchsorted(theta_sorted, phi, side="left"))


def _pit(posterior: Posterior, phi: Any) -> Optional[float]:
    if posterior.discrete:
        return None
    return float(posterior.cdf(phi))


# ----------------------------------------------------------------------------
# Oracle
# ----------------------------------------------------------------------------

def oracle_bank(
    model: ModelInterface,
    y: Any,
    cfg: CalibrationConfig,
    keep_theta: bool = False,
) -> ReplicateBank:
    """Replicates with φ from the exact posterior and θ from π̃(·|y)."""
    if not model.has_oracle:
        raise MissingOracle(f"model {model.name!r} has no exact posterior")
    exact = model.exact_posterior(y)
    post_y = model.approx_posterior(y)
    s_y = np.atleast_1d(model.summary(y)).astype(float)

    def one(i: int) -> Replicate:
        rng = substream(cfg.master_seed, i)
        phi = _scalar(exact.sample(1, rng)[0])
        theta, first = (None, None) if cfg.exact_sets else _sorted_draws(post_y, cfg.J, rng)
        return Replicate(
            index=i,
            phi=phi,
            dataset=None,
            covered=_coverage(post_y, phi, theta, cfg),
            summary=s_y,
            theta=theta if keep_theta else None,
            theta_rank=_rank(theta, phi),
            theta_draw=first,
            pit=_pit(post_y, phi),
        )

    logger.info(f"Oracle bank: M={cfg.M}, J={cfg.J}, alpha={cfg.alpha}, workers={cfg.workers}")
    replicates = farm(one, cfg.M, cfg.workers)
    return ReplicateBank(replicates, "oracle", cfg.master_seed, J=cfg.J, proposals=cfg.M, requested=cfg.M)


def binomial_estimate(bank: ReplicateBank) -> CoverageEstimate:
    """Equal-weight mean of the indicators with its binomial standard error."""
    M = len(bank)
    c_hat = float(bank.covered.mean())
    return CoverageEstimate(c_hat=c_hat, sigma_hat=math.sqrt(c_hat * (1.0 - c_hat) / M), ess=float(M), m_used=M)


def run_oracle(model: ModelInterface, y: Any, cfg: CalibrationConfig) -> CoverageEstimate:
    """
    Monte Carlo coverage of the approximate set under the exact posterior.

    Raises:
        MissingOracle: the model has no exact posterior
    """
    return binomial_estimate(oracle_bank(model, y, cfg))


def operational_coverage(approx: ApproxPosterior, exact: Posterior, alpha: float, kind: SetKind) -> float:
    """Exact posterior mass of the approximate posterior's level-alpha set."""
    return exact.mass(approx.credible_set(alpha, SetKind.parse(kind)))


def exact_operational_coverage(model: ModelInterface, y: Any, alpha: float, kind: SetKind) -> float:
    """b(y) at the observed data."""
    return operational_coverage(model.approx_posterior(y), model.exact_posterior(y), alpha, kind)


# ----------------------------------------------------------------------------
# Regression
# ----------------------------------------------------------------------------

def run_regression_bank(model: ModelInterface, cfg: CalibrationConfig, keep_theta: bool = False) -> ReplicateBank:
    """
    Prior-predictive replicates with coverage indicators.

    Raises:
        SimulatorFailure: a model callback failed; carries the replicate index
    """
    def one(i: int) -> Replicate:
        rng = substream(cfg.master_seed, i)
        phi = _scalar(model.prior_sampler(rng))
        y_i = model.data_simulator(phi, rng)
        post = model.approx_posterior(y_i)
        theta, first = (None, None) if cfg.exact_sets else _sorted_draws(post, cfg.J, rng)
        return Replicate(
            index=i,
            phi=phi,
            dataset=y_i,
            covered=_coverage(post, phi, theta, cfg),
            summary=np.atleast_1d(model.summary(y_i)).astype(float),
            theta=theta if keep_theta else None,
            theta_rank=_rank(theta, phi),
            theta_draw=first,
            pit=_pit(post, phi),
        )

    logger.info(f"Regression bank: model={model.name}, M={cfg.M}, J={cfg.J}, workers={cfg.workers}")
    replicates = farm(one, cfg.M, cfg.workers)
    covered = sum(r.covered for r in replicates)
    logger.info(f"Regression bank complete: {covered}/{cfg.M} covered")
    return ReplicateBank(replicates, "regress", cfg.master_seed, J=cfg.J, proposals=cfg.M, requested=cfg.M)


def fit_bank(bank: ReplicateBank, basis_dim: int = 10, lam: Optional[float] = None) -> RegressionFit:
    """Logistic regression of c_i on s(y_i)."""
    return fit_regression(bank.covered, bank.summaries, basis_dim=basis_dim, lam=lam)


def estimate_coverage_at(bank: ReplicateBank, regression_fit: RegressionFit, s_y: Any) -> CoverageEstimate:
    """
    Fitted coverage probability at the observed summary.

    Emits ExtrapolationWarning when ``s_y`` is outside the training box.
    """
    prediction = predict(regression_fit, s_y)
    M = len(bank)
    return CoverageEstimate(
        c_hat=prediction.probability,
        sigma_hat=prediction.std_error,
        ess=float(M),
        m_used=M,
        extrapolated=prediction.extrapolated,
    )


# ----------------------------------------------------------------------------
# Importance sampling
# ----------------------------------------------------------------------------

def normalized_weights(bank: ReplicateBank) -> Tuple[np.ndarray, np.ndarray]:
    """
    (unnormalized w̃, normalized W) from stored log weights.

    w̃_i = exp(ℓ_i − max ℓ) so the largest weight is 1.

    Raises:
        DegenerateWeights: a non-finite log weight, or no positive weight
    """
    log_w = np.array([np.nan if r.log_weight is None else r.log_weight for r in bank.replicates], dtype=float)
    for r, lw in zip(bank.replicates, log_w):
        if math.isnan(lw) or lw == math.inf:
            raise DegenerateWeights(f"replicate {r.index} has non-finite weight (log weight {lw})", index=r.index)
    top = log_w.max() if log_w.size else -math.inf
    if top == -math.inf:
        raise DegenerateWeights("importance weights sum to zero")
    raw = np.exp(log_w - top)
    total = float(raw.sum())
    return raw, raw / total


def weighted_estimate(bank: ReplicateBank) -> CoverageEstimate:
    """Self-normalized IS estimate from a bank's weights."""
    raw, W = normalized_weights(bank)
    c = bank.covered
    c_hat = float(min(max(np.dot(W, c), 0.0), 1.0))
    return CoverageEstimate(
        c_hat=c_hat,
        sigma_hat=weighted_sigma(W, c, c_hat),
        ess=ess(raw),
        m_used=len(bank),
        clt_variance=clt_variance(raw, c, c_hat),
    )


def window_estimate(bank: ReplicateBank, rho: float) -> Optional[CoverageEstimate]:
    """Re-window a stored IS bank at a radius ``rho``; None when nothing survives."""
    distances = bank.distances
    if distances is None:
        raise ValueError("bank has no window distances")
    keep = distances <= rho
    if not keep.any():
        return None
    return weighted_estimate(bank.subset(keep))


def run_importance_sampler(
    model: ModelInterface,
    y: Any,
    cfg: CalibrationConfig,
    dist: DistanceFunction,
    raise_on_timeout: bool = True,
    keep_theta: bool = False,
) -> Tuple[Optional[CoverageEstimate], ReplicateBank]:
    """
    Windowed importance sampler.

    Each replicate proposes φ ~ π̃(·|y) and y' ~ p(·|φ) until δ(y', y) ≤ ρ.
    All replicates draw on one budget of ``cfg.window_cap * cfg.M``
    proposals, so a single replicate may use far more than ``window_cap``.
    Accepted replicates carry log weight −log p̃(y|φ).

    A run that fits in the budget never has a proposal refused, so its bank
    does not depend on the worker count. Once the budget is spent the
    remaining replicates stop; which of them were accepted by then can vary
    with scheduling when ``cfg.workers > 1``.

    Returns:
        (estimate, bank)

    Raises:
        WindowTimeout: the budget ran out before M acceptances (the partial
            bank and its estimate are attached); suppressed by
            ``raise_on_timeout=False``
        DegenerateWeights: non-finite importance weight
    """
    if not cfg.rho > 0:
        raise ValueError("importance sampler needs rho > 0")
    post_y: ApproxPosterior = model.approx_posterior(y)
    distance = dist.bind(model, y, post_y, substream(cfg.master_seed, REFERENCE_STREAM), cfg.J)
    budget = ProposalBudget(cfg.window_cap * cfg.M)

    def one(i: int) -> Tuple[Optional[Replicate], int]:
        rng = substream(cfg.master_seed, i)
        attempt = 0
        while budget.take():
            attempt += 1
            phi = _scalar(post_y.sample(1, rng)[0])
            y_i = model.data_simulator(phi, rng)
            post = model.approx_posterior(y_i) if dist.needs_posterior else None
            theta = first = None
            if dist.needs_theta:
                theta, first = _sorted_draws(post, cfg.J, rng)
            d = distance(y_i, post, theta)
            if d > cfg.rho:
                logger.debug(f"replicate {i}: proposal {attempt} rejected (distance {d:.4g})")
                continue
            post = post if post is not None else model.approx_posterior(y_i)
            if theta is None and not cfg.exact_sets:
                theta, first = _sorted_draws(post, cfg.J, rng)
            log_weight = -float(post_y.log_likelihood(phi))
            return Replicate(
                index=i,
                phi=phi,
                dataset=y_i,
                covered=_coverage(post, phi, theta, cfg),
                summary=np.atleast_1d(model.summary(y_i)).astype(float),
                theta=theta if keep_theta else None,
                theta_rank=_rank(theta, phi),
                theta_draw=first,
                pit=_pit(post, phi),
                log_weight=log_weight,
                distance=float(d),
                proposals=attempt,
            ), attempt
        return None, attempt

    logger.info(
        f"Importance sampler: model={model.name}, M={cfg.M}, rho={cfg.rho}, "
        f"distance={dist.name}, workers={cfg.workers}"
    )
    results = farm(one, cfg.M, cfg.workers)
    accepted = [r for r, _ in results if r is not None]
    proposals = sum(n for _, n in results)
    timed_out = len(accepted) < cfg.M
    bank = ReplicateBank(accepted, "is", cfg.master_seed, J=cfg.J, rho=cfg.rho,
                         proposals=proposals, timed_out=timed_out, requested=cfg.M)

    estimate = None
    if accepted:
        _, W = normalized_weights(bank)
        for r, w in zip(bank.replicates, W):
            r.weight = float(w)
        estimate = weighted_estimate(bank)

    logger.info(f"Importance sampler: {len(accepted)}/{cfg.M} accepted from {proposals} proposals")
    if timed_out:
        message = (
            f"window rho={cfg.rho} filled {len(accepted)} of {cfg.M} replicates "
            f"using {proposals} proposals (budget {budget.total})"
        )
        logger.warning(message)
        if raise_on_timeout:
            raise WindowTimeout(message, bank=bank, estimate=estimate)
    return estimate, bank
