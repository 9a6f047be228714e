"""Benchmark: estimators against closed-form and enumerated coverage.

Every case here needs large banks or many seeds, so none of it runs in the
unit suite:

  * regression fit vs closed-form b(y) on 25 points of [-3, 3], v in {0, .5, 1},
  * windowed IS 20-seed means vs b(y) at v = 0, and the bias at rho 1 vs 0.3,
  * oracle, regression and IS agree on an N = 4 Ising lattice,
  * the v = 1 coverage curve sits on the diagonal,
  * windowing bias shrinks along a descending rho sweep (50 seeds),
  * binned Ising coverage follows the fitted curve,
  * the Gibbs sampler's law of f on 3x3 lattices matches enumeration.
"""

import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
from scipy.stats import chisquare

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from calibration.config import CalibrationConfig
from calibration.curve import coverage_curve
from calibration.engine import (
    estimate_coverage_at,
    fit_bank,
    run_importance_sampler,
    run_oracle,
    run_regression_bank,
)
from calibration.figures import ising_regression
from calibration.rng import REFERENCE_STREAM, substream
from diagnostics.sweep import rho_sweep
from distances import KSDistance, SummaryDistance
from models.ising import Boundary, IsingLattice, IsingModel, edge_count, edge_discrepancy, simulate_field
from models.tempered_normal import TemperedNormalModel, exact_coverage
from regression.spline_logistic import predict_many

WINDOW_SEEDS = 20
SWEEP_SEEDS = 50


def regression_closure():
    ys = np.linspace(-3.0, 3.0, 25)
    for v in (0.0, 0.5, 1.0):
        cfg = CalibrationConfig(alpha=0.9, M=10_000, J=200, exact_sets=True, master_seed=41)
        bank = run_regression_bank(TemperedNormalModel(v), cfg)
        prob, _, _ = predict_many(fit_bank(bank, cfg.basis_dim), ys[:, None], warn=False)
        gap = float(np.max(np.abs(prob - [exact_coverage(y, 0.9, v) for y in ys])))
        print(f"{'regression max gap, v=' + str(v):30s} | {gap:.4f}")
        assert gap <= 0.03, f"v={v}: fitted curve {gap:.4f} away from b(y)"


def window_closure():
    model = TemperedNormalModel(0.0)
    bias = {1.0: 0.0, 0.3: 0.0}
    for alpha in (0.5, 0.9):
        for y in (0.0, 1.0, 2.0):
            truth = exact_coverage(y, alpha, 0.0)
            for rho in (1.0, 0.3):
                cfg = CalibrationConfig(alpha=alpha, M=10_000, rho=rho, exact_sets=True, master_seed=700)
                mean = np.mean([
                    run_importance_sampler(model, y, cfg.with_(master_seed=cfg.master_seed + k),
                                           SummaryDistance())[0].c_hat
                    for k in range(WINDOW_SEEDS)
                ])
                bias[rho] += abs(mean - truth)
                if rho == 0.3:
                    print(f"{f'IS alpha={alpha} y={y}':30s} | mean {mean:.4f} vs b {truth:.4f}")
                    assert abs(mean - truth) <= 0.02, f"alpha={alpha}, y={y}: mean {mean:.4f} vs {truth:.4f}"
    print(f"{'summed |bias| rho=1 / rho=0.3':30s} | {bias[1.0]:.4f} / {bias[0.3]:.4f}")
    assert bias[1.0] > bias[0.3], "narrowing the window did not reduce the bias"


def ising_closure():
    model = IsingModel(4, sweeps=200)
    y = simulate_field(4, Boundary.FREE, 1.0, 200, substream(90, REFERENCE_STREAM))
    cfg = CalibrationConfig(alpha=0.95, M=5000, J=200, master_seed=90)
    estimates = {"oracle": run_oracle(model, y, cfg)}
    bank = run_regression_bank(model, cfg)
    estimates["regress"] = estimate_coverage_at(bank, fit_bank(bank, cfg.basis_dim), model.summary(y))
    estimates["is"], _ = run_importance_sampler(model, y, cfg.with_(rho=0.3), KSDistance())
    assert estimates["is"].m_used >= 500, f"only {estimates['is'].m_used} replicates in the window"
    for name, e in estimates.items():
        print(f"{'Ising N=4 ' + name:30s} | {e.c_hat:.4f} +/- {e.sigma_hat:.4f}")
    for a, b in itertools.combinations(estimates, 2):
        ea, eb = estimates[a], estimates[b]
        limit = 3.0 * math.hypot(ea.sigma_hat, eb.sigma_hat)
        assert abs(ea.c_hat - eb.c_hat) <= limit, f"{a} vs {b}: gap {abs(ea.c_hat - eb.c_hat):.4f} > {limit:.4f}"


def curve_identity():
    model = TemperedNormalModel(1.0)
    sups = []
    for k in range(WINDOW_SEEDS):
        cfg = CalibrationConfig(M=5000, J=500, rho=0.5, master_seed=1200 + k)
        curve = coverage_curve(model, 0.0, cfg, SummaryDistance())
        assert np.all(np.diff(curve.c_hat) >= 0), f"seed {cfg.master_seed}: curve not monotone"
        sups.append(float(np.max(np.abs(curve.c_hat - curve.alphas))))
    print(f"{'mean sup |c_hat(a) - a|, v=1':30s} | {np.mean(sups):.4f}")
    assert np.mean(sups) <= 0.05


def sweep_bias():
    model = TemperedNormalModel(0.0)
    truth = exact_coverage(0.0, 0.9, 0.0)
    grid = (1.0, 0.6, 0.3)
    c_hats = np.zeros((SWEEP_SEEDS, len(grid)))
    for k in range(SWEEP_SEEDS):
        cfg = CalibrationConfig(alpha=0.9, M=2000, exact_sets=True, master_seed=1500 + k)
        c_hats[k] = rho_sweep(model, 0.0, cfg, SummaryDistance(), grid)["c_hat"].to_numpy()
    bias = np.abs(np.nanmean(c_hats, axis=0) - truth)
    print(f"{'|bias| at rho 1.0, 0.6, 0.3':30s} | {', '.join(f'{b:.4f}' for b in bias)}")
    assert np.all(np.diff(bias) <= 0), "bias grew as the window narrowed"


def ising_binned_fit():
    frames = ising_regression(IsingModel(4, sweeps=200), CalibrationConfig(alpha=0.9, M=10_000, J=200,
                                                                             master_seed=60), bin_size=500)
    bins = frames["fig3_left_bins"]
    gap = float(np.max(np.abs(bins["coverage"] - bins["c_fit"])))
    print(f"{'binned vs fitted gap, N=4':30s} | {gap:.4f}")
    assert gap <= 0.05


def gibbs_law():
    phi, fields, sweeps = 0.8, 5000, 2000
    counts = np.zeros(edge_count(3, Boundary.FREE) + 1)
    for bits in itertools.product((0, 1), repeat=9):
        counts[edge_discrepancy(IsingLattice(np.array(bits).reshape(3, 3)))] += 1
    law = counts * np.exp(-phi * np.arange(counts.size))
    expected = law / law.sum() * fields
    stats = [edge_discrepancy(simulate_field(3, Boundary.FREE, phi, sweeps, substream(77, i))) for i in range(fields)]
    observed = np.bincount(stats, minlength=counts.size).astype(float)
    keep = expected >= 5.0
    obs, exp = observed[keep], expected[keep]
    if not keep.all():
        obs = np.append(obs, observed[~keep].sum())
        exp = np.append(exp, expected[~keep].sum())
    p_value = chisquare(obs, exp).pvalue
    print(f"{'Gibbs law of f, N=3 phi=0.8':30s} | p = {p_value:.3f}")
    assert p_value > 0.01


if __name__ == "__main__":
    print("Benchmark: estimator closure against exact coverage")
    print("-" * 75)

    cases = (regression_closure, window_closure, ising_closure, curve_identity, sweep_bias,
             ising_binned_fit, gibbs_law)
    for case in cases:
        start = time.perf_counter()
        case()
        print(f"{case.__name__:30s} | {time.perf_counter() - start:8.1f} s")
        print()

    print("-" * 75)
    print("OK - every estimator closes on its exact reference.")
