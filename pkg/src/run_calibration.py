#!/usr/bin/env python3
"""
CLI for credible-set calibration runs.

Usage:
    python src/run_calibration.py calibrate --model tempered-normal --v 0 --algorithm is --y 2 --rho 0.3
    python src/run_calibration.py figure --id fig1-topleft --m 2000
    python src/run_calibration.py sweep --model tempered-normal --v 0 --y 0 --rho-grid 1.0 0.6 0.3

Exit codes: 0 success, 2 configuration error, 3 estimator error
(separation, window timeout, degenerate weights).
"""

import argparse
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

sys.path.insert(0, str(Path(__file__).parent))
from calibration.bank_io import (
    frame_to_bank,
    read_bank,
    write_bank,
    write_curve,
    write_manifest,
    write_summary,
)
from calibration.config import CalibrationConfig
from calibration.curve import curve_from_bank
from calibration.engine import (
    binomial_estimate,
    estimate_coverage_at,
    exact_operational_coverage,
    fit_bank,
    oracle_bank,
    run_importance_sampler,
    run_regression_bank,
)
from calibration.figures import (
    FIGURE_ALIASES,
    FIGURE_IDS,
    ising_curve,
    ising_regression,
    normal_regression,
    normal_window,
    resolve_figure_id,
)
from calibration.rng import REFERENCE_STREAM, substream
from credible.sets import SetKind
from diagnostics.sweep import rho_sweep, sweep_bank
from distances.window import DISTANCES, make_distance
from errors import CalibrationError, ConfigError, MissingOracle, WindowTimeout
from models.ising import IsingModel, read_lattice, simulate_field, write_lattice, Boundary
from models.tempered_normal import TemperedNormalModel
from regression.spline_logistic import save_fit
from utils import FLOAT_FORMAT, read_key_values

logger = logging.getLogger("run_calibration")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ESTIMATOR = 3


# ----------------------------------------------------------------------------
# Argument parsing
# ----------------------------------------------------------------------------

def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {name} must be an integer, got {raw!r}") from None


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, help="Flat 'key = value' file; flags win on conflict")
    parser.add_argument("--model", choices=["tempered-normal", "ising"], default="tempered-normal",
                        help="Model (default: tempered-normal)")
    parser.add_argument("--v", type=float, default=1.0, help="Tempering power (default: 1.0)")
    parser.add_argument("--ising-n", type=int, default=4, help="Ising lattice side N (default: 4)")
    parser.add_argument("--ising-data", type=str, help="Observed lattice file (rows of 0/1)")
    parser.add_argument("--sweeps", type=int, default=2000, help="Gibbs sweeps per simulated lattice (default: 2000)")
    parser.add_argument("--y", type=float, help="Observed data for the tempered-normal model")
    parser.add_argument("--alpha", type=float, default=0.9, help="Nominal level (default: 0.9)")
    parser.add_argument("--m", type=int, default=1000, help="Replicates M (default: 1000)")
    parser.add_argument("--j", type=int, default=1000, help="Posterior draws J per replicate (default: 1000)")
    parser.add_argument("--rho", type=float, default=0.5, help="Window radius (default: 0.5)")
    parser.add_argument("--distance", choices=sorted(DISTANCES), default="summary",
                        help="Window distance (default: summary)")
    parser.add_argument("--set-kind", choices=[k.value for k in SetKind], default="equal_tail",
                        help="Credible-set construction (default: equal_tail)")
    parser.add_argument("--exact-sets", action="store_true",
                        help="Use the approximate posterior's exact set instead of its sample estimate")
    parser.add_argument("--window-cap", type=int, default=1000,
                        help="Average proposals per replicate; the run stops after window_cap * M (default: 1000)")
    parser.add_argument("--curve-points", type=int, default=512, help="Alpha grid size (default: 512)")
    parser.add_argument("--basis-dim", type=int, default=10, help="Spline basis per summary (default: 10)")
    parser.add_argument("--seed", type=int, default=1, help="Master seed (default: 1)")
    parser.add_argument("--workers", type=int, default=_env_int("CALIBRATION_WORKERS", 1),
                        help="Replicate worker threads (default: $CALIBRATION_WORKERS or 1)")
    parser.add_argument("--out", type=str, default=os.getenv("CALIBRATION_OUT_DIR", "results/calibration"),
                        help="Output directory (default: $CALIBRATION_OUT_DIR or results/calibration)")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Estimate the coverage of approximate Bayesian credible sets",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Regression estimate, exact approximation (coverage should equal alpha)
  python src/run_calibration.py calibrate --model tempered-normal --v 1 \\
                                --algorithm regress --alpha 0.9 --m 10000 --y 0 --seed 1

  # Windowed importance sampler on a 4x4 Ising lattice
  python src/run_calibration.py calibrate --model ising --ising-n 4 \\
                                --ising-data lattice.txt --algorithm is \\
                                --rho 0.5 --distance ks --out results/ising

  # Figure data
  python src/run_calibration.py figure --id fig3-right --ising-n 4 --m 2000

  # Window sweep
  python src/run_calibration.py sweep --v 0 --y 0 --rho-grid 1.0 0.6 0.3
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    calibrate = sub.add_parser("calibrate", help="Run one estimator")
    _add_common(calibrate)
    calibrate.add_argument("--algorithm", choices=["oracle", "regress", "is", "curve"], default="regress",
                           help="Estimator (default: regress)")

    figure = sub.add_parser("figure", help="Emit plot data for a standard figure")
    _add_common(figure)
    figure.add_argument("--id", dest="figure_id", choices=FIGURE_IDS + tuple(FIGURE_ALIASES), required=True,
                        help="Figure id; descriptive aliases such as ising-curve are accepted")
    figure.add_argument("--seeds", type=int, default=5, help="Seeds per cell for fig1-bottom (default: 5)")
    figure.add_argument("--phi-true", type=float, default=1.0,
                        help="Smoothing used to simulate an observed lattice when --ising-data is absent")

    sweep = sub.add_parser("sweep", help="Re-window one IS bank over a descending rho grid")
    _add_common(sweep)
    sweep.add_argument("--rho-grid", type=float, nargs="+", help="Descending radii (required)")
    sweep.add_argument("--bank", type=str, help="Re-sweep a stored bank CSV instead of sampling")
    return parser


def _coerce(action: argparse.Action, raw: str) -> Any:
    """Convert a config-file string the way the matching flag would."""
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    convert = action.type or str
    if action.nargs in ("+", "*"):
        value = [convert(v) for v in raw.replace(",", " ").split()]
        bad = [v for v in value if action.choices and v not in action.choices]
    else:
        value = convert(raw)
        bad = [value] if action.choices and value not in action.choices else []
    if bad:
        raise ValueError(f"{bad[0]!r} not in {sorted(action.choices)}")
    return value


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse flags; values from ``--config`` become defaults so explicit flags win."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args

    subparser = parser._subparsers._group_actions[0].choices[args.command]
    try:
        entries = read_key_values(args.config)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    known = {a.dest: a for a in subparser._actions}
    defaults: Dict[str, Any] = {}
    for key, raw in entries.items():
        dest = key.strip().lstrip("-").replace("-", "_")
        if dest not in known or dest in ("config", "help"):
            raise ConfigError(f"unknown config key {key!r} in {args.config}")
        try:
            defaults[dest] = _coerce(known[dest], raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


# ----------------------------------------------------------------------------
# Run helpers
# ----------------------------------------------------------------------------

def make_config(args: argparse.Namespace) -> CalibrationConfig:
    return CalibrationConfig(
        alpha=args.alpha,
        M=args.m,
        J=args.j,
        rho=args.rho,
        master_seed=args.seed,
        set_kind=args.set_kind,
        workers=args.workers,
        exact_sets=args.exact_sets,
        window_cap=args.window_cap,
        curve_points=args.curve_points,
        basis_dim=args.basis_dim,
    )


def make_model(args: argparse.Namespace):
    if args.model == "tempered-normal":
        return TemperedNormalModel(args.v)
    try:
        return IsingModel(args.ising_n, sweeps=args.sweeps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def observed_data(args: argparse.Namespace, model, required: bool) -> Any:
    """The observed dataset, or None when optional and absent."""
    if args.model == "tempered-normal":
        if args.y is None:
            if required:
                raise ConfigError("this algorithm needs observed data: pass --y")
            return None
        if not math.isfinite(args.y):
            raise ConfigError("--y must be finite")
        return args.y
    if not args.ising_data:
        if required:
            raise ConfigError("this algorithm needs observed data: pass --ising-data")
        return None
    try:
        lattice = read_lattice(args.ising_data)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read lattice {args.ising_data}: {exc}") from exc
    if lattice.N != model.N:
        raise ConfigError(f"lattice is {lattice.N}x{lattice.N} but --ising-n is {model.N}")
    return lattice


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in vars(args).items()}


def _print_banner(title: str) -> None:
    print("\n" + "=" * 70)
    print(title)
    print("=" * 70)


# ----------------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------------

def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = make_config(args)
    model = make_model(args)
    y = observed_data(args, model, required=args.algorithm != "regress")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs: List[str] = []
    extra: Dict[str, Any] = {}

    if args.algorithm == "oracle":
        bank = oracle_bank(model, y, cfg)
        estimate = binomial_estimate(bank)
    elif args.algorithm == "regress":
        bank = run_regression_bank(model, cfg)
        fitted = fit_bank(bank, cfg.basis_dim)
        save_fit(out / "fit.json", fitted)
        outputs.append("fit.json")
        extra["lambda"] = fitted.lam
        estimate = None
        if y is not None:
            estimate = estimate_coverage_at(bank, fitted, model.summary(y))
            extra["extrapolated"] = estimate.extrapolated
    else:
        if args.algorithm == "curve":
            cfg = cfg.with_(set_kind=SetKind.LOWER_TAIL)
        dist = make_distance(args.distance)
        try:
            estimate, bank = run_importance_sampler(model, y, cfg, dist)
        except WindowTimeout as exc:
            write_bank(out / "bank.csv", exc.bank)
            write_summary(out / "summary.txt", exc.estimate, cfg.master_seed, args.algorithm,
                          {"timed_out": True, "proposals": exc.bank.proposals})
            write_manifest(out / "manifest.json", _flags(args), ["bank.csv", "summary.txt"])
            raise
        extra["proposals"] = bank.proposals
        if args.algorithm == "curve":
            curve = curve_from_bank(bank, cfg.curve_points, cfg.exact_sets)
            write_curve(out / "curve.csv", curve)
            outputs.append("curve.csv")

    if y is not None and model.has_oracle:
        extra["b_exact"] = exact_operational_coverage(model, y, cfg.alpha, cfg.set_kind)

    write_bank(out / "bank.csv", bank)
    write_summary(out / "summary.txt", estimate, cfg.master_seed, args.algorithm, extra)
    outputs = ["bank.csv", "summary.txt"] + outputs
    write_manifest(out / "manifest.json", _flags(args), outputs + ["manifest.json"])

    _print_banner(f"CALIBRATION: {model.name} / {args.algorithm}")
    if estimate is not None:
        print(f"c_hat     = {estimate.c_hat:.4f}")
        print(f"sigma_hat = {estimate.sigma_hat:.4f}")
        print(f"ess       = {estimate.ess:.1f}  (m_used = {estimate.m_used})")
    if "b_exact" in extra:
        print(f"b_exact   = {extra['b_exact']:.4f}")
    print(f"Outputs written to {out}")
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    cfg = make_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    figure_id = resolve_figure_id(args.figure_id)
    if figure_id == "fig1-topleft":
        frames = normal_regression(cfg, vs=(0.0, 0.5, 1.0))
    elif figure_id == "fig1-bottom":
        frames = normal_window(cfg, v=args.v, seeds=args.seeds, dist=make_distance(args.distance))
    else:
        args.model = "ising"
        model = make_model(args)
        if figure_id == "fig3-left":
            frames = ising_regression(model, cfg)
        else:
            y = observed_data(args, model, required=False)
            if y is None:
                y = simulate_field(model.N, Boundary.FREE, args.phi_true, model.sweeps,
                                   substream(cfg.master_seed, REFERENCE_STREAM))
                write_lattice(out / "observed_lattice.txt", y)
            distance = "ks" if args.distance == "summary" else args.distance
            frames = ising_curve(model, y, cfg, make_distance(distance))

    outputs = []
    for name, frame in frames.items():
        frame.to_csv(out / f"{name}.csv", index=False, float_format=FLOAT_FORMAT)
        outputs.append(f"{name}.csv")
    write_manifest(out / "manifest.json", _flags(args), outputs + ["manifest.json"])
    _print_banner(f"FIGURE DATA: {figure_id}")
    for name in outputs:
        print(f"  {out / name}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    if not args.rho_grid:
        raise ConfigError("sweep needs --rho-grid")
    cfg = make_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.bank:
        try:
            bank = frame_to_bank(read_bank(args.bank))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read bank {args.bank}: {exc}") from exc
        table = sweep_bank(bank, args.rho_grid)
    else:
        model = make_model(args)
        y = observed_data(args, model, required=True)
        try:
            table = rho_sweep(model, y, cfg, make_distance(args.distance), args.rho_grid)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    table.to_csv(out / "sweep.csv", index=False, float_format=FLOAT_FORMAT, na_rep="")
    write_manifest(out / "manifest.json", _flags(args), ["sweep.csv", "manifest.json"])
    _print_banner("RHO SWEEP")
    print(table.to_string(index=False))
    return EXIT_OK


COMMANDS = {"calibrate": cmd_calibrate, "figure": cmd_figure, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, MissingOracle) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CalibrationError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        print(f"estimator error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ESTIMATOR
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
