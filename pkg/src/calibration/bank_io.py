"""
Run artifacts: replicate-bank CSV, curve CSV, key = value summary, manifest.

Bank CSV header: i,phi,covered,weight,distance,s_1..s_p. Weight and
distance are empty for banks that have none. Floats are written with 17
significant digits so a bank read back re-windows bitwise identically.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from calibration import __version__
from calibration.engine import CoverageEstimate, Replicate, ReplicateBank
from utils import FLOAT_FORMAT, dump_json_safe, write_key_values

logger = logging.getLogger(__name__)

ARTIFACT_VERSION = __version__
BANK_COLUMNS = ["i", "phi", "covered", "weight", "distance"]


def bank_to_frame(bank: ReplicateBank) -> pd.DataFrame:
    """One row per replicate in index order."""
    p = bank.summaries.shape[1] if len(bank) else 0
    rows: Dict[str, List[Any]] = {name: [] for name in BANK_COLUMNS}
    for j in range(p):
        rows[f"s_{j + 1}"] = []
    for r in bank.replicates:
        rows["i"].append(r.index)
        rows["phi"].append(r.phi)
        rows["covered"].append(int(r.covered))
        rows["weight"].append(np.nan if r.weight is None else float(r.weight))
        rows["distance"].append(np.nan if r.distance is None else float(r.distance))
        for j, value in enumerate(np.atleast_1d(r.summary)):
            rows[f"s_{j + 1}"].append(float(value))
    frame = pd.DataFrame(rows)
    frame["weight"] = frame["weight"].astype(float)
    frame["distance"] = frame["distance"].astype(float)
    return frame


def write_bank(path: Union[str, Path], bank: ReplicateBank) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    bank_to_frame(bank).to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="")
    logger.info(f"Wrote {len(bank)} replicates to {path}")
    return path


def read_bank(path: Union[str, Path]) -> pd.DataFrame:
    frame = pd.read_csv(path)
    missing = [c for c in BANK_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path}: bank CSV lacks columns {missing}")
    return frame


def frame_to_bank(frame: pd.DataFrame, algorithm: str = "is", master_seed: int = 0) -> ReplicateBank:
    """
    Rebuild a bank (without datasets or draws) from its CSV frame.

    Stored weights are reused as log weights; estimates are scale invariant.
    """
    s_cols = sorted((c for c in frame.columns if c.startswith("s_")), key=lambda c: int(c[2:]))
    replicates = []
    for row in frame.itertuples(index=False):
        data = row._asdict()
        weight = data["weight"]
        distance = data["distance"]
        has_weight = weight is not None and not pd.isna(weight)
        log_weight = None
        if has_weight:
            log_weight = float(np.log(weight)) if weight > 0 else -np.inf
        replicates.append(Replicate(
            index=int(data["i"]),
            phi=data["phi"],
            dataset=None,
            covered=int(data["covered"]),
            summary=np.array([float(data[c]) for c in s_cols]),
            weight=float(weight) if has_weight else None,
            log_weight=log_weight,
            distance=None if distance is None or pd.isna(distance) else float(distance),
        ))
    return ReplicateBank(replicates, algorithm, master_seed, requested=len(replicates))


def write_curve(path: Union[str, Path], curve) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    curve.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_summary(
    path: Union[str, Path],
    estimate: Optional[CoverageEstimate],
    seed: int,
    algorithm: str,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """``key = value`` summary: c_hat, sigma_hat, ess, m_used, seed, algorithm (+ extras)."""
    values: Dict[str, Any] = {}
    if estimate is not None:
        values.update({
            "c_hat": float(estimate.c_hat),
            "sigma_hat": float(estimate.sigma_hat),
            "ess": float(estimate.ess),
            "m_used": int(estimate.m_used),
        })
    else:
        values.update({"c_hat": None, "sigma_hat": None, "ess": None, "m_used": 0})
    values["seed"] = int(seed)
    values["algorithm"] = algorithm
    if estimate is not None and estimate.clt_variance is not None:
        values["clt_variance"] = float(estimate.clt_variance)
    for key, value in (extra or {}).items():
        values[key] = value
    return write_key_values(path, values)


def write_manifest(path: Union[str, Path], flags: Dict[str, Any], outputs: List[str]) -> Path:
    """Everything needed to reproduce a run: resolved flags, seed, version, outputs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "artifact_version": ARTIFACT_VERSION,
        "seed": flags.get("seed"),
        "flags": flags,
        "outputs": outputs,
    }
    with open(path, "w") as f:
        dump_json_safe(manifest, f)
    return path
