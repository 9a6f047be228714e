"""Tests for importance-weight diagnostics, the marginal rank test and rho sweeps."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from calibration.config import CalibrationConfig
from calibration.engine import estimate_coverage_at, fit_bank, run_importance_sampler, run_regression_bank
from diagnostics import clt_variance, ess, marginal_rank_test, weighted_sigma
from diagnostics.sweep import SWEEP_COLUMNS, rho_sweep, sweep_bank
from distances import SummaryDistance
from errors import AllZeroWeights, WindowTimeout
from models.tempered_normal import TemperedNormalModel


class TestEss:

    def test_mixed_weights(self):
        assert ess([1.0, 1.0, 2.0]) == pytest.approx(16.0 / 6.0)

    def test_uniform_weights(self):
        assert ess(np.full(7, 0.3)) == pytest.approx(7.0)

    def test_single_dominant_weight(self):
        assert ess([1.0, 0.0, 0.0]) == pytest.approx(1.0)

    def test_scale_free(self):
        assert ess([2.0, 4.0, 6.0]) == pytest.approx(ess([1.0, 2.0, 3.0]))

    def test_all_zero(self):
        with pytest.raises(AllZeroWeights):
            ess([0.0, 0.0])

    def test_negative_or_nan(self):
        with pytest.raises(ValueError):
            ess([1.0, -0.5])
        with pytest.raises(ValueError):
            ess([1.0, math.nan])


class TestWeightedSigma:

    def test_two_equal_weights(self):
        assert weighted_sigma([0.5, 0.5], [1, 0], 0.5) == pytest.approx(math.sqrt(0.125))

    def test_zero_when_all_agree(self):
        assert weighted_sigma([0.2, 0.8], [1, 1], 1.0) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            weighted_sigma([0.5, 0.5], [1], 0.5)


class TestCltVariance:

    def test_equal_weights_is_bernoulli_variance(self):
        c = np.array([1, 0, 1, 1], dtype=float)
        assert clt_variance(np.ones(4), c, 0.75) == pytest.approx(0.75 * 0.25)

    def test_invariant_to_weight_scale(self):
        c = np.array([1, 0, 1], dtype=float)
        w = np.array([0.2, 0.5, 0.3])
        assert clt_variance(w, c, 0.5) == pytest.approx(clt_variance(10 * w, c, 0.5))


# ----------------------------------------------------------------------------
# Marginal rank test
# ----------------------------------------------------------------------------

class TestMarginalRankTest:

    def test_shifted_samples_rejected(self):
        rng = np.random.default_rng(0)
        assert marginal_rank_test(rng.normal(0, 1, 500), rng.normal(1, 1, 500)) < 1e-6

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            marginal_rank_test([], [1.0])

    def test_prior_approximation_fools_marginal_test(self):
        # At v = 0 the pooled θ draws share the prior marginal with φ, yet the
        # conditional coverage at y = 2 is far from nominal.
        model = TemperedNormalModel(0.0)
        cfg = CalibrationConfig(alpha=0.9, M=4000, J=50, master_seed=13)
        bank = run_regression_bank(model, cfg)
        p_value = marginal_rank_test(bank.phis, bank.theta_draws)
        assert p_value > 0.05
        estimate = estimate_coverage_at(bank, fit_bank(bank), [2.0])
        assert abs(estimate.c_hat - 0.9) > 0.05


# ----------------------------------------------------------------------------
# Rho sweep
# ----------------------------------------------------------------------------

class TestRhoSweep:

    def test_table_shape_and_monotone_counts(self):
        cfg = CalibrationConfig(M=400, J=50, master_seed=6, exact_sets=True)
        table = rho_sweep(TemperedNormalModel(0.5), 1.0, cfg, SummaryDistance(), [1.0, 0.5, 0.2])
        assert list(table.columns) == SWEEP_COLUMNS
        assert table["m_used"].iloc[0] == 400
        assert np.all(np.diff(table["m_used"].to_numpy()) <= 0)
        assert not table["empty"].any()

    def test_empty_window_row(self):
        cfg = CalibrationConfig(M=50, master_seed=6, exact_sets=True)
        _, bank = run_importance_sampler(TemperedNormalModel(0.5), 1.0, cfg.with_(rho=1.0), SummaryDistance())
        table = sweep_bank(bank, [1.0, 1e-9])
        last = table.iloc[-1]
        assert bool(last["empty"])
        assert last["m_used"] == 0
        assert math.isnan(last["c_hat"])

    def test_grid_must_descend(self):
        cfg = CalibrationConfig(M=10, exact_sets=True)
        with pytest.raises(ValueError):
            rho_sweep(TemperedNormalModel(0.5), 1.0, cfg, SummaryDistance(), [0.2, 0.5])

    def test_grid_must_be_positive(self):
        cfg = CalibrationConfig(M=10, exact_sets=True)
        with pytest.raises(ValueError):
            rho_sweep(TemperedNormalModel(0.5), 1.0, cfg, SummaryDistance(), [0.5, 0.0])

    def test_widest_radius_timeout_propagates(self):
        cfg = CalibrationConfig(M=3, window_cap=2, exact_sets=True)
        with pytest.raises(WindowTimeout):
            rho_sweep(TemperedNormalModel(0.5), 50.0, cfg, SummaryDistance(), [1e-3])
