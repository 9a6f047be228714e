"""End-to-end tests for the run_calibration command line."""

import json
import sys
from pathlib import Path

import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import run_calibration
from run_calibration import EXIT_CONFIG, EXIT_ESTIMATOR, EXIT_OK, main
from utils import read_key_values


def run(*argv):
    return main([str(a) for a in argv])


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


class TestCalibrate:

    def test_regression_run_writes_artifacts(self, tmp_path):
        code = run("calibrate", "--algorithm", "regress", "--v", 1, "--m", 400, "--j", 50,
                   "--y", 0, "--basis-dim", 0, "--seed", 3, "--out", tmp_path, "--log-level", "WARNING")
        assert code == EXIT_OK
        for name in ("bank.csv", "summary.txt", "fit.json", "manifest.json"):
            assert (tmp_path / name).exists()
        summary = read_key_values(tmp_path / "summary.txt")
        assert 0.0 <= float(summary["c_hat"]) <= 1.0
        assert summary["algorithm"] == "regress"
        assert float(summary["b_exact"]) == pytest.approx(0.9, abs=1e-6)
        assert len(pd.read_csv(tmp_path / "bank.csv")) == 400

    def test_regression_without_y_fits_only(self, tmp_path):
        code = run("calibrate", "--algorithm", "regress", "--m", 200, "--j", 40, "--basis-dim", 0,
                   "--out", tmp_path, "--log-level", "WARNING")
        assert code == EXIT_OK
        assert read_key_values(tmp_path / "summary.txt")["c_hat"] == ""

    def test_importance_sampler_needs_y(self, tmp_path):
        assert run("calibrate", "--algorithm", "is", "--out", tmp_path) == EXIT_CONFIG

    def test_ising_needs_lattice(self, tmp_path):
        code = run("calibrate", "--model", "ising", "--ising-n", 2, "--algorithm", "oracle", "--out", tmp_path)
        assert code == EXIT_CONFIG

    def test_bad_alpha(self, tmp_path):
        assert run("calibrate", "--algorithm", "oracle", "--y", 0, "--alpha", 1.5, "--out", tmp_path) == EXIT_CONFIG

    def test_window_timeout_keeps_partial_bank(self, tmp_path):
        code = run("calibrate", "--algorithm", "is", "--v", 0.5, "--y", 50, "--rho", 0.001,
                   "--m", 3, "--window-cap", 2, "--out", tmp_path, "--log-level", "ERROR")
        assert code == EXIT_ESTIMATOR
        assert (tmp_path / "bank.csv").exists()
        assert read_key_values(tmp_path / "summary.txt")["timed_out"] == "True"

    def test_curve_writes_curve_csv(self, tmp_path):
        code = run("calibrate", "--algorithm", "curve", "--v", 1, "--y", 0.5, "--m", 100, "--j", 50,
                   "--rho", 1.0, "--curve-points", 21, "--out", tmp_path, "--log-level", "WARNING")
        assert code == EXIT_OK
        curve = pd.read_csv(tmp_path / "curve.csv")
        assert list(curve.columns) == ["alpha", "c_hat"]
        assert len(curve) == 21


class TestConfigFile:

    def test_flags_override_file(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("# small run\nm = 30\nalpha = 0.8\nexact-sets = true\n")
        out = tmp_path / "out"
        code = run("calibrate", "--config", conf, "--algorithm", "oracle", "--y", 1,
                   "--alpha", 0.7, "--out", out, "--log-level", "WARNING")
        assert code == EXIT_OK
        flags = manifest(out)["flags"]
        assert flags["m"] == 30
        assert flags["alpha"] == 0.7
        assert flags["exact_sets"] is True

    def test_unknown_key(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("colour = blue\n")
        assert run("calibrate", "--config", conf, "--out", tmp_path) == EXIT_CONFIG

    def test_bad_choice(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("distance = euclid\n")
        assert run("calibrate", "--config", conf, "--out", tmp_path) == EXIT_CONFIG

    def test_missing_file(self, tmp_path):
        assert run("calibrate", "--config", tmp_path / "absent.conf", "--out", tmp_path) == EXIT_CONFIG

    def test_workers_env_must_be_integer(self, monkeypatch):
        monkeypatch.setenv("CALIBRATION_WORKERS", "many")
        with pytest.raises(run_calibration.ConfigError):
            run_calibration.build_parser()


class TestSweep:

    def test_sweep_table(self, tmp_path):
        code = run("sweep", "--v", 0.5, "--y", 0, "--m", 40, "--exact-sets",
                   "--rho-grid", 1.0, 0.5, "--out", tmp_path, "--log-level", "WARNING")
        assert code == EXIT_OK
        table = pd.read_csv(tmp_path / "sweep.csv")
        assert table["rho"].tolist() == [1.0, 0.5]
        assert table["m_used"].iloc[0] == 40

    def test_sweep_needs_grid(self, tmp_path):
        assert run("sweep", "--y", 0, "--out", tmp_path) == EXIT_CONFIG

    def test_sweep_rejects_ascending_grid(self, tmp_path):
        code = run("sweep", "--y", 0, "--m", 5, "--rho-grid", 0.2, 0.5, "--out", tmp_path)
        assert code == EXIT_CONFIG

    def test_resweep_stored_bank(self, tmp_path):
        first = tmp_path / "first"
        assert run("calibrate", "--algorithm", "is", "--v", 0.5, "--y", 0, "--m", 40, "--rho", 1.0,
                   "--exact-sets", "--out", first, "--log-level", "WARNING") == EXIT_OK
        second = tmp_path / "second"
        code = run("sweep", "--bank", first / "bank.csv", "--rho-grid", 1.0, 0.3, "--out", second)
        assert code == EXIT_OK
        assert pd.read_csv(second / "sweep.csv")["m_used"].iloc[0] == 40
