"""
Tests for the Ising lattice model.

Partition functions are checked against brute-force enumeration of all
2^(N²) lattices for N = 2 and N = 3, under both boundary conditions.
"""

import itertools
import math
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.special import logsumexp
from scipy.stats import chisquare

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from calibration.rng import substream
from errors import SizeLimit
from models.ising import (
    Boundary,
    IsingLattice,
    IsingModel,
    PartitionTable,
    edge_count,
    edge_discrepancy,
    log_partition,
    parse_lattice,
    posterior_grid,
    read_lattice,
    simulate_field,
    write_lattice,
)


def brute_force_log_z(N, boundary, phi):
    stats = []
    for bits in itertools.product((0, 1), repeat=N * N):
        lattice = IsingLattice(np.array(bits).reshape(N, N))
        stats.append(edge_discrepancy(lattice, boundary))
    return float(logsumexp(-phi * np.array(stats, dtype=float)))


CHECKERBOARD_3 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])


# ----------------------------------------------------------------------------
# Lattices and statistics
# ----------------------------------------------------------------------------

class TestLattice:

    def test_uniform_lattice_has_no_discrepancy(self):
        assert edge_discrepancy(IsingLattice(np.ones((4, 4), dtype=int))) == 0

    def test_checkerboard_free(self):
        assert edge_discrepancy(IsingLattice(CHECKERBOARD_3), Boundary.FREE) == edge_count(3, Boundary.FREE)

    def test_checkerboard_periodic_odd_side(self):
        # wrap-around bonds of an odd checkerboard join equal cells
        assert edge_discrepancy(IsingLattice(CHECKERBOARD_3), Boundary.PERIODIC) == 12
        assert edge_count(3, Boundary.PERIODIC) == 18

    def test_two_by_two_torus_doubles_bonds(self):
        lattice = IsingLattice(np.array([[0, 1], [0, 0]]))
        assert edge_discrepancy(lattice, Boundary.FREE) == 2
        assert edge_discrepancy(lattice, Boundary.PERIODIC) == 4

    def test_periodic_statistic_bounds_free(self):
        rng = np.random.default_rng(9)
        for N in (2, 3, 4, 5):
            for _ in range(50):
                lattice = IsingLattice(rng.integers(0, 2, size=(N, N)))
                assert edge_discrepancy(lattice, Boundary.PERIODIC) >= edge_discrepancy(lattice, Boundary.FREE)

    def test_invalid_lattices(self):
        with pytest.raises(ValueError):
            IsingLattice(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            IsingLattice(np.array([[0, 2], [1, 0]]))
        with pytest.raises(ValueError):
            IsingLattice(np.zeros((1, 1)))

    def test_equality(self):
        a = IsingLattice(np.array([[0, 1], [1, 1]]))
        assert a == IsingLattice(np.array([[0, 1], [1, 1]]))
        assert a != IsingLattice(np.array([[0, 1], [1, 1]]), Boundary.PERIODIC)


class TestLatticeFiles:

    def test_write_then_read(self, tmp_path):
        lattice = IsingLattice(CHECKERBOARD_3)
        path = write_lattice(tmp_path / "y.txt", lattice)
        assert path.read_text() == "010\n101\n010\n"
        assert read_lattice(path) == lattice

    def test_blank_lines_ignored(self):
        assert parse_lattice("\n01\n\n11\n").N == 2

    def test_bad_characters(self):
        with pytest.raises(ValueError):
            parse_lattice("01\n1x\n")

    def test_ragged_rows(self):
        with pytest.raises(ValueError):
            parse_lattice("01\n1\n")

    def test_empty_file(self):
        with pytest.raises(ValueError):
            parse_lattice("\n\n")


# ----------------------------------------------------------------------------
# Partition functions
# ----------------------------------------------------------------------------

class TestPartitionFunction:

    @pytest.mark.parametrize("phi", [0.0, 0.4, 1.0, 2.0])
    def test_two_by_two_free_closed_form(self, phi):
        expected = math.log(2 + 12 * math.exp(-2 * phi) + 2 * math.exp(-4 * phi))
        assert log_partition(2, Boundary.FREE, phi) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("N", [2, 3])
    @pytest.mark.parametrize("boundary", [Boundary.FREE, Boundary.PERIODIC])
    @pytest.mark.parametrize("phi", [0.0, 0.7, 1.9])
    def test_matches_enumeration(self, N, boundary, phi):
        assert log_partition(N, boundary, phi) == pytest.approx(brute_force_log_z(N, boundary, phi), rel=1e-10)

    def test_phi_zero_counts_all_lattices(self):
        assert log_partition(4, Boundary.PERIODIC, 0.0) == pytest.approx(16 * math.log(2))
        assert log_partition(4, Boundary.FREE, 0.0) == pytest.approx(16 * math.log(2))

    @pytest.mark.parametrize("N", [2, 3, 4])
    @pytest.mark.parametrize("boundary", [Boundary.FREE, Boundary.PERIODIC])
    def test_strictly_decreasing_in_smoothing(self, N, boundary):
        values = [log_partition(N, boundary, phi) for phi in np.linspace(0.0, 3.0, 13)]
        assert values[0] == pytest.approx(N * N * math.log(2))
        assert np.all(np.diff(values) < 0)

    def test_size_limits(self):
        with pytest.raises(SizeLimit):
            log_partition(13, Boundary.FREE, 1.0)
        with pytest.raises(ValueError):
            log_partition(1, Boundary.FREE, 1.0)

    def test_table_matches_direct_values(self):
        table = PartitionTable.build(3, Boundary.PERIODIC, phi_max=2.0, grid_points=21)
        assert table.phi_grid[5] == pytest.approx(0.5)
        assert table.log_z[5] == pytest.approx(log_partition(3, Boundary.PERIODIC, 0.5))
        assert table(0.5) == pytest.approx(table.log_z[5])


class TestPosteriors:

    def test_posterior_shape_follows_likelihood(self):
        table = PartitionTable.build(3, Boundary.FREE, grid_points=101)
        post = posterior_grid(5, table)
        i, j = 10, 60
        dlog = float(post.log_density(table.phi_grid[j]) - post.log_density(table.phi_grid[i]))
        expected = -(table.phi_grid[j] - table.phi_grid[i]) * 5 - (table.log_z[j] - table.log_z[i])
        assert dlog == pytest.approx(expected, abs=1e-9)

    def test_log_likelihood_on_grid(self):
        table = PartitionTable.build(2, Boundary.FREE, grid_points=11)
        post = posterior_grid(2, table)
        phi = table.phi_grid[4]
        assert float(post.log_likelihood(phi)) == pytest.approx(-2 * phi - log_partition(2, Boundary.FREE, phi))

    def test_model_tabulates_every_statistic(self):
        model = IsingModel(3, sweeps=5, grid_points=101)
        y = IsingLattice(CHECKERBOARD_3)
        assert model.statistic(y) == 12
        assert model.approx_posterior(y) is model.approx_posterior_at(12)
        assert model.exact_posterior(y) is model.exact_posterior_at(12)
        assert model.has_oracle

    def test_periodic_approximation_differs_from_exact(self):
        model = IsingModel(3, sweeps=5, grid_points=201)
        approx = model.approx_posterior_at(4)
        exact = model.exact_posterior_at(4)
        assert abs(float(approx.quantile(0.5)) - float(exact.quantile(0.5))) > 1e-3

    def test_free_approximation_is_exact(self):
        model = IsingModel(2, sweeps=5, grid_points=101, approx_boundary=Boundary.FREE)
        np.testing.assert_allclose(
            model.approx_posterior_at(2).cdf(model.exact_table.phi_grid),
            model.exact_posterior_at(2).cdf(model.exact_table.phi_grid),
        )

    def test_wrong_side_rejected(self):
        model = IsingModel(2, sweeps=5, grid_points=11)
        with pytest.raises(ValueError):
            model.statistic(IsingLattice(CHECKERBOARD_3))

    def test_describe(self):
        info = IsingModel(2, sweeps=7, grid_points=11).describe()
        assert info == {"model": "ising", "ising_n": 2, "sweeps": 7, "approx_boundary": "periodic"}


# ----------------------------------------------------------------------------
# Gibbs sampler
# ----------------------------------------------------------------------------

class TestGibbsSampler:

    def test_deterministic_given_generator(self):
        a = simulate_field(4, Boundary.FREE, 0.8, 10, substream(3, 0))
        b = simulate_field(4, Boundary.FREE, 0.8, 10, substream(3, 0))
        assert a == b

    def test_stationary_distribution_two_by_two(self):
        # P(s) ∝ count(s)·exp(−φ s) with counts 2, 12, 2 for s = 0, 2, 4
        phi = 1.0
        weights = np.array([2.0, 12.0 * math.exp(-2 * phi), 2.0 * math.exp(-4 * phi)])
        expected = weights / weights.sum()
        stats = [
            edge_discrepancy(simulate_field(2, Boundary.FREE, phi, 20, substream(17, i)))
            for i in range(3000)
        ]
        observed = np.array([np.mean(np.equal(stats, s)) for s in (0, 2, 4)])
        np.testing.assert_allclose(observed, expected, atol=0.04)

    def test_statistic_law_three_by_three(self):
        phi, fields = 0.8, 2000
        counts = np.zeros(edge_count(3, Boundary.FREE) + 1)
        for bits in itertools.product((0, 1), repeat=9):
            counts[edge_discrepancy(IsingLattice(np.array(bits).reshape(3, 3)))] += 1
        law = counts * np.exp(-phi * np.arange(counts.size))
        law /= law.sum()
        stats = [edge_discrepancy(simulate_field(3, Boundary.FREE, phi, 30, substream(21, i))) for i in range(fields)]
        observed = np.bincount(stats, minlength=counts.size).astype(float)
        # merge sparse bins until every expected count reaches 5
        obs_bins, exp_bins, o, e = [], [], 0.0, 0.0
        for obs_s, exp_s in zip(observed, law * fields):
            o, e = o + obs_s, e + exp_s
            if e >= 5.0:
                obs_bins.append(o)
                exp_bins.append(e)
                o = e = 0.0
        obs_bins[-1] += o
        exp_bins[-1] += e
        assert chisquare(obs_bins, exp_bins).pvalue > 0.01

    def test_zero_smoothing_gives_fair_cells(self):
        lattice = simulate_field(10, Boundary.PERIODIC, 0.0, 3, substream(2, 0))
        assert 0.3 < lattice.cells.mean() < 0.7

    def test_strong_smoothing_reduces_discrepancy(self):
        rough = simulate_field(6, Boundary.FREE, 0.0, 50, substream(4, 0))
        smooth = simulate_field(6, Boundary.FREE, 2.0, 50, substream(4, 0))
        assert edge_discrepancy(smooth) < edge_discrepancy(rough)

    def test_sweeps_must_be_positive(self):
        with pytest.raises(ValueError):
            simulate_field(3, Boundary.FREE, 1.0, 0, substream(1, 0))
