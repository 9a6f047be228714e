"""Utilities for writing run artifacts: JSON manifests, key = value files, CSV floats."""
import json
import math
from pathlib import Path
from typing import Any, Dict, Union


# 17 significant digits round-trips every IEEE double.
FLOAT_FORMAT = "%.17g"


def format_float(value: float) -> str:
    """Format a float with ``FLOAT_FORMAT``; non-finite values use ``inf``/``-inf``/``nan``."""
    return FLOAT_FORMAT % float(value)


def _is_finite_number(value: Any) -> bool:
    """Return True if *value* is a finite scalar number."""
    if value is None or isinstance(value, bool) or isinstance(value, str):
        return False
    try:
        return math.isfinite(float(value))
    except (TypeError, ValueError, OverflowError):
        return False


def sanitize_for_json(obj: Any) -> Any:
    """Recursively replace non-finite floats in dicts/lists with ``None``.

    numpy scalars are converted to Python numbers and arrays to lists, so
    manifests and fit files can be dumped directly from result objects.
    """
    if isinstance(obj, dict):
        return {str(k): sanitize_for_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize_for_json(v) for v in obj]
    if hasattr(obj, "tolist") and not isinstance(obj, (str, bytes)):
        return sanitize_for_json(obj.tolist())
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return obj if _is_finite_number(obj) else None
    return obj


def dump_json_safe(
    obj: Any,
    f,
    indent: int = 2,
    default=None,
    **kwargs,
) -> None:
    """Serialize *obj* to JSON using ``allow_nan=False`` after sanitizing it."""
    cleaned = sanitize_for_json(obj)
    try:
        json.dump(cleaned, f, indent=indent, default=default, allow_nan=False, **kwargs)
    except ValueError as exc:
        raise ValueError(f"JSON serialization failed for {type(obj).__name__}: {exc}") from exc


def write_key_values(path: Union[str, Path], values: Dict[str, Any]) -> Path:
    """Write ``key = value`` lines in insertion order. Floats use ``FLOAT_FORMAT``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for key, value in values.items():
        if isinstance(value, float):
            text = format_float(value)
        elif value is None:
            text = ""
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_key_values(path: Union[str, Path]) -> Dict[str, str]:
    """
    Parse a flat ``key = value`` text file.

    Blank lines and lines starting with ``#`` are skipped. Values are returned
    as stripped strings; callers convert them.

    Raises:
        ValueError: on a non-blank line without ``=``.
    """
    result: Dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        result[key.strip()] = value.strip()
    return result
