"""
Calibration run configuration.

    alpha         nominal credible level, 0 < alpha < 1
    M             replicate count
    J             posterior draws per replicate
    rho           window radius for the importance sampler (inf = no window)
    master_seed   64-bit seed from which every replicate substream derives
    set_kind      credible-set construction
    workers       threads in the replicate farm
    exact_sets    use the approximate posterior's exact set C̃ instead of the
                  sample estimate Ĉ (estimates b(y) rather than c(y))
    window_cap    proposals per replicate; the sampler gives up after
                  window_cap * M proposals in total
    curve_points  α-grid size K for coverage curves
    basis_dim     spline basis dimension per summary (0 = linear logistic)
"""

import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict

from credible.sets import SetKind
from errors import ConfigError

MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class CalibrationConfig:
    """Validated settings for one calibration run."""
    alpha: float = 0.9
    M: int = 1000
    J: int = 1000
    rho: float = 0.5
    master_seed: int = 1
    set_kind: SetKind = SetKind.EQUAL_TAIL
    workers: int = 1
    exact_sets: bool = False
    window_cap: int = 1000
    curve_points: int = 512
    basis_dim: int = 10

    def __post_init__(self):
        try:
            object.__setattr__(self, "set_kind", SetKind.parse(self.set_kind))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

        alpha = _number("alpha", self.alpha)
        if not 0.0 < alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        rho = _number("rho", self.rho)
        if math.isnan(rho) or rho < 0:
            raise ConfigError(f"rho must be >= 0, got {self.rho}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "rho", rho)

        for name, minimum in (("M", 1), ("J", 1), ("workers", 1), ("window_cap", 1), ("curve_points", 2)):
            value = getattr(self, name)
            if not _is_int(value) or value < minimum:
                raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")
            object.__setattr__(self, name, int(value))

        if not _is_int(self.master_seed) or not 0 <= self.master_seed < MAX_SEED:
            raise ConfigError(f"master_seed must be an integer in [0, 2^64), got {self.master_seed!r}")
        object.__setattr__(self, "master_seed", int(self.master_seed))

        if not _is_int(self.basis_dim) or (self.basis_dim != 0 and self.basis_dim < 4):
            raise ConfigError(f"basis_dim must be 0 or >= 4, got {self.basis_dim!r}")
        object.__setattr__(self, "basis_dim", int(self.basis_dim))
        object.__setattr__(self, "exact_sets", bool(self.exact_sets))

    def with_(self, **changes: Any) -> "CalibrationConfig":
        """Copy with fields replaced (revalidated)."""
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["set_kind"] = self.set_kind.value
        return data


def _is_int(value: Any) -> bool:
    if isinstance(value, bool):
        return False
    try:
        return int(value) == value
    except (TypeError, ValueError, OverflowError):
        return False


def _number(name: str, value: Any) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
