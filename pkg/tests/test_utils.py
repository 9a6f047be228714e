"""Tests for artifact helpers: JSON sanitizing and key = value files."""
import io
import json
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from utils import dump_json_safe, format_float, read_key_values, sanitize_for_json, write_key_values


def test_sanitize_replaces_non_finite_floats():
    cleaned = sanitize_for_json({"a": math.inf, "b": [1.0, math.nan, -math.inf], "c": "x"})
    assert cleaned == {"a": None, "b": [1.0, None, None], "c": "x"}


def test_sanitize_converts_numpy():
    cleaned = sanitize_for_json({"arr": np.array([1.5, np.inf]), "n": np.int64(3), "f": np.float64(0.25)})
    assert cleaned == {"arr": [1.5, None], "n": 3, "f": 0.25}


def test_sanitize_keeps_bools_and_none():
    assert sanitize_for_json({"t": True, "n": None}) == {"t": True, "n": None}


def test_dump_json_safe_is_strict_json():
    buffer = io.StringIO()
    dump_json_safe({"x": math.nan, "y": [1, 2]}, buffer)
    assert json.loads(buffer.getvalue()) == {"x": None, "y": [1, 2]}


def test_format_float_round_trips():
    value = 1.0 / 3.0
    assert float(format_float(value)) == value
    assert format_float(math.inf) == "inf"


def test_key_values_round_trip(tmp_path):
    path = write_key_values(tmp_path / "kv.txt", {"c_hat": 0.1 + 0.2, "seed": 4, "algorithm": "is", "empty": None})
    values = read_key_values(path)
    assert float(values["c_hat"]) == 0.1 + 0.2
    assert values["seed"] == "4"
    assert values["algorithm"] == "is"
    assert values["empty"] == ""


def test_read_key_values_skips_comments(tmp_path):
    path = tmp_path / "c.conf"
    path.write_text("# header\n\nalpha = 0.8\n  m=50  \n")
    assert read_key_values(path) == {"alpha": "0.8", "m": "50"}


def test_read_key_values_rejects_bare_lines(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("alpha 0.8\n")
    with pytest.raises(ValueError, match="expected 'key = value'"):
        read_key_values(path)
