"""Tests for KS distances and the window distance functions."""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from distances import (
    KSDistance,
    KSSampleDistance,
    SummaryDistance,
    ks_continuous,
    ks_discrete,
    ks_grid,
    make_distance,
    summary_distance,
)
from errors import EmptySample, GridMismatch, UnrankedLabel
from models import BinomialLabelModel, IsingModel, TemperedNormalModel
from models.ising import IsingLattice


class TestKsContinuous:

    def test_identical_samples(self):
        assert ks_continuous([1.0, 2.0, 3.0], [3.0, 1.0, 2.0]) == 0.0

    def test_disjoint_supports(self):
        assert ks_continuous([0.0, 1.0, 2.0], [5.0, 6.0]) == 1.0

    def test_one_point_differs(self):
        assert ks_continuous([1, 2, 3], [1, 2, 4]) == pytest.approx(1.0 / 3.0)

    def test_unequal_sizes(self):
        assert ks_continuous([0.0], [0.0, 1.0]) == pytest.approx(0.5)

    def test_same_law_stays_under_critical_value(self):
        J = 500
        below = sum(
            ks_continuous(rng.standard_normal(J), rng.standard_normal(J)) < 1.36 * np.sqrt(2.0 / J)
            for rng in (np.random.default_rng(seed) for seed in range(100))
        )
        assert below >= 90

    def test_empty_rejected(self):
        with pytest.raises(EmptySample):
            ks_continuous([], [1.0])


class TestKsGrid:

    def test_identical_cdfs(self):
        grid = np.linspace(0, 1, 11)
        assert ks_grid(grid, grid, grid, grid) == 0.0

    def test_shifted_uniforms(self):
        x = np.linspace(-1.0, 3.0, 4001)
        cdf_a = np.clip(x, 0.0, 1.0)
        cdf_b = np.clip(x - 0.5, 0.0, 1.0)
        assert ks_grid(cdf_a, cdf_b) == pytest.approx(0.5, abs=1e-3)

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            ks_grid([0.0, 1.0], [0.0, 0.5, 1.0])
        with pytest.raises(GridMismatch):
            ks_grid([0.0, 1.0], [0.0, 1.0], [0.0, 1.0], [0.0, 2.0])


class TestKsDiscrete:

    def test_equal_masses(self):
        p = {"a": 0.2, "b": 0.8}
        assert ks_discrete(p, p, ["b", "a"]) == 0.0

    def test_point_masses_on_first_two_ranks(self):
        assert ks_discrete({"r1": 1.0}, {"r2": 1.0}, ["r1", "r2"]) == 1.0

    def test_single_step(self):
        d = ks_discrete({"r1": 0.6, "r2": 0.4}, {"r1": 0.3, "r2": 0.7}, ["r1", "r2"])
        assert d == pytest.approx(0.3)

    def test_unranked_label(self):
        with pytest.raises(UnrankedLabel):
            ks_discrete({"r1": 0.5, "x": 0.5}, {"r1": 1.0}, ["r1"])

    def test_zero_mass_label_may_be_unranked(self):
        assert ks_discrete({"r1": 1.0, "x": 0.0}, {"r1": 1.0}, ["r1"]) == 0.0


def test_summary_distance_is_euclidean():
    assert summary_distance([0.0, 0.0], [3.0, 4.0]) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        summary_distance([0.0], [1.0, 2.0])


# ----------------------------------------------------------------------------
# Bound window distances
# ----------------------------------------------------------------------------

class TestWindowDistances:

    def test_make_distance_names(self):
        assert isinstance(make_distance("summary"), SummaryDistance)
        assert isinstance(make_distance("ks"), KSDistance)
        assert isinstance(make_distance("ks-samples"), KSSampleDistance)
        with pytest.raises(ValueError):
            make_distance("wasserstein")

    def test_summary_window_on_normal_model(self):
        model = TemperedNormalModel(0.5)
        post_y = model.approx_posterior(1.0)
        f = SummaryDistance().bind(model, 1.0, post_y)
        assert f(1.25) == pytest.approx(0.25)

    def test_analytic_ks_is_zero_for_same_data(self):
        model = TemperedNormalModel(1.0)
        post_y = model.approx_posterior(0.3)
        f = KSDistance().bind(model, 0.3, post_y)
        assert f(0.3, model.approx_posterior(0.3)) == pytest.approx(0.0, abs=1e-12)

    def test_analytic_ks_matches_normal_shift(self):
        # N(0, 1/2) vs N(1, 1/2): sup gap is 2Φ(1/(2·sqrt(1/2))) − 1
        from scipy.stats import norm
        model = TemperedNormalModel(1.0)
        f = KSDistance().bind(model, 0.0, model.approx_posterior(0.0))
        expected = 2 * norm.cdf(0.5 / np.sqrt(0.5)) - 1
        assert f(2.0) == pytest.approx(expected, abs=2e-3)

    def test_ks_at_v_zero_is_always_zero(self):
        model = TemperedNormalModel(0.0)
        f = KSDistance().bind(model, 1.0, model.approx_posterior(1.0))
        assert f(-5.0) == pytest.approx(0.0, abs=1e-12)

    def test_grid_ks_on_ising_model(self):
        model = IsingModel(2, sweeps=5, grid_points=201)
        y = IsingLattice(np.array([[0, 0], [0, 1]]))
        f = KSDistance().bind(model, y, model.approx_posterior(y))
        assert f(y) == 0.0
        other = IsingLattice(np.array([[0, 1], [1, 0]]))
        assert 0.0 < f(other) <= 1.0

    def test_bind_reports_ks_branch(self, caplog):
        caplog.set_level(logging.DEBUG, logger="distances.window")
        KSDistance().bind(TemperedNormalModel(1.0), 0.0, TemperedNormalModel(1.0).approx_posterior(0.0))
        ising = IsingModel(2, sweeps=5, grid_points=201)
        y = IsingLattice(np.array([[0, 0], [0, 1]]))
        KSDistance().bind(ising, y, ising.approx_posterior(y))
        assert "KS distance on 4001 points" in caplog.text
        assert "201-point posterior grid" in caplog.text

    def test_discrete_ks_on_label_model(self):
        model = BinomialLabelModel(K=4, n=10, v=1.0)
        f = KSDistance().bind(model, 5, model.approx_posterior(5))
        assert f(5) == pytest.approx(0.0, abs=1e-12)
        assert f(0) > f(4)

    def test_sample_ks_needs_generator(self):
        model = TemperedNormalModel(1.0)
        with pytest.raises(ValueError):
            KSSampleDistance().bind(model, 0.0, model.approx_posterior(0.0))

    def test_sample_ks_compares_draws(self):
        model = TemperedNormalModel(1.0)
        post = model.approx_posterior(0.0)
        f = KSSampleDistance().bind(model, 0.0, post, np.random.default_rng(1), J=500)
        far = np.sort(model.approx_posterior(20.0).sample(500, np.random.default_rng(2)))
        assert f(20.0, None, far) == 1.0
        with pytest.raises(ValueError):
            f(0.0, None, None)
