"""Tests for the figure data builders at small scale."""

import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from calibration.config import CalibrationConfig
from calibration.engine import exact_operational_coverage, operational_coverage
from calibration.figures import (
    FIGURE_ALIASES,
    FIGURE_IDS,
    binned_coverage,
    ising_curve,
    ising_regression,
    normal_regression,
    normal_window,
    resolve_figure_id,
)
from calibration.rng import substream
from credible.sets import SetKind
from models.ising import Boundary, IsingModel, simulate_field
from models.tempered_normal import exact_coverage
from run_calibration import EXIT_OK, main


@pytest.fixture(scope="module")
def small_ising():
    return IsingModel(2, sweeps=20)


def test_binned_coverage():
    s = np.array([3.0, 1.0, 2.0, 0.0])
    c = np.array([1.0, 0.0, 1.0, 1.0])
    bins = binned_coverage(s, c, bin_size=2)
    assert bins["s_mean"].tolist() == [0.5, 2.5]
    assert bins["coverage"].tolist() == [0.5, 1.0]
    assert bins["count"].tolist() == [2, 2]


def test_normal_regression_frame():
    cfg = CalibrationConfig(M=300, J=50, basis_dim=0, master_seed=2)
    frame = normal_regression(cfg, vs=(1.0,), y_grid=[0.0, 1.0])["fig1_topleft"]
    assert list(frame.columns) == ["v", "y", "b_true", "b_hat", "se", "extrapolated"]
    np.testing.assert_allclose(frame["b_true"], 0.9, atol=1e-9)
    assert frame["b_hat"].between(0.0, 1.0).all()


def test_normal_window_rows():
    cfg = CalibrationConfig(M=30, J=40, master_seed=4)
    frame = normal_window(cfg, v=0.5, alphas=(0.9,), rhos=(1.0,), ys=(0.0,), seeds=2)["fig1_bottom"]
    assert len(frame) == 2
    assert frame["seed"].tolist() == [4, 5]
    assert frame["b_true"].iloc[0] == pytest.approx(exact_coverage(0.0, 0.9, 0.5))


def test_ising_regression_frames(small_ising):
    cfg = CalibrationConfig(M=200, J=50, basis_dim=0, master_seed=3)
    frames = ising_regression(small_ising, cfg)
    assert set(frames) == {"fig3_left_bins", "fig3_left_fit"}
    fit = frames["fig3_left_fit"]
    assert fit["s"].min() >= 0 and fit["s"].max() <= 4
    assert fit["b_exact"].between(0.0, 1.0).all()


def test_ising_exact_column_matches_observed_coverage(small_ising):
    y = simulate_field(2, Boundary.FREE, 1.0, 20, substream(8, -1))
    s = small_ising.statistic(y)
    by_statistic = operational_coverage(small_ising.approx_posterior_at(s), small_ising.exact_posterior_at(s),
                                        0.9, SetKind.EQUAL_TAIL)
    assert by_statistic == pytest.approx(exact_operational_coverage(small_ising, y, 0.9, SetKind.EQUAL_TAIL))


def test_ising_curve_frames(small_ising):
    cfg = CalibrationConfig(M=40, J=50, rho=1.0, curve_points=33, master_seed=6)
    y = simulate_field(2, Boundary.FREE, 1.0, 20, substream(6, -1))
    frames = ising_curve(small_ising, y, cfg)
    assert set(frames) == {"fig3_right_curve", "fig3_right_inverse"}
    curve = frames["fig3_right_curve"]
    assert len(curve) == 33
    assert np.all(np.diff(curve["c_hat"].to_numpy()) >= 0)
    assert frames["fig3_right_inverse"]["target"].tolist() == [0.5, 0.9, 0.95]


@pytest.mark.parametrize("figure_id", ["fig3-right", "ising-curve"])
def test_cli_ising_curve_writes_observed_lattice(tmp_path, figure_id):
    code = main(["figure", "--id", figure_id, "--ising-n", "2", "--sweeps", "10", "--m", "30",
                 "--j", "40", "--rho", "1.0", "--curve-points", "17", "--out", str(tmp_path),
                 "--log-level", "WARNING"])
    assert code == EXIT_OK
    assert (tmp_path / "observed_lattice.txt").exists()
    assert len(pd.read_csv(tmp_path / "fig3_right_curve.csv")) == 17


def test_cli_rejects_unknown_figure(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["figure", "--id", "fig2", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_figure_ids():
    assert FIGURE_IDS == ("fig1-topleft", "fig1-bottom", "fig3-left", "fig3-right")
    assert set(FIGURE_ALIASES.values()) == set(FIGURE_IDS)


def test_aliases_resolve_to_canonical_ids():
    assert resolve_figure_id("fig1-bottom") == "fig1-bottom"
    assert resolve_figure_id("normal-regression") == "fig1-topleft"
    assert resolve_figure_id("ising-regression") == "fig3-left"
    with pytest.raises(ValueError):
        resolve_figure_id("fig9")
