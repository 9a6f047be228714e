"""Tests for the binomial label model."""

import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import binom

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from credible.sets import SetKind
from errors import ConfigError
from models.discrete_toy import BinomialLabelModel


@pytest.fixture
def model():
    return BinomialLabelModel(K=4, n=10, v=0.5)


def test_exact_posterior_is_normalized_likelihood(model):
    posterior = model.exact_posterior(7)
    lik = binom.pmf(7, 10, model.success)
    np.testing.assert_allclose(posterior.probabilities, lik / lik.sum(), rtol=1e-12)


def test_tempering_flattens(model):
    exact = model.exact_posterior(9).probabilities
    approx = model.approx_posterior(9).probabilities
    assert approx.max() < exact.max()


def test_zero_power_gives_uniform():
    approx = BinomialLabelModel(K=5, n=10, v=0.0).approx_posterior(3)
    np.testing.assert_allclose(approx.probabilities, np.full(5, 0.2))


def test_ranking_descends_in_mass(model):
    posterior = model.exact_posterior(9)
    masses = posterior.masses()
    ranked = [masses[label] for label in posterior.ranking()]
    assert ranked == sorted(ranked, reverse=True)


def test_hpd_set_holds_most_probable_label(model):
    posterior = model.exact_posterior(9)
    cset = posterior.credible_set(0.5, SetKind.DISCRETE_HPD)
    assert posterior.ranking()[0] in cset


def test_simulator_stays_in_range(model):
    rng = np.random.default_rng(0)
    draws = [model.data_simulator(model.prior_sampler(rng), rng) for _ in range(200)]
    assert all(0 <= y <= 10 for y in draws)


def test_summary_is_count(model):
    np.testing.assert_array_equal(model.summary(4), [4.0])


@pytest.mark.parametrize("kwargs", [{"K": 1}, {"n": 0}, {"v": -0.1}])
def test_invalid_parameters(kwargs):
    with pytest.raises(ConfigError):
        BinomialLabelModel(**kwargs)
