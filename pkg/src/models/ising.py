"""
Ising smoothing model on an N×N binary lattice.

    p(y|φ) = exp(−φ f(y; E)) / Z(φ),    Z(φ) = Σ_x exp(−φ f(x; E))

f(y; E) counts edges of E joining unequal cells and is sufficient for φ.
The data live on the free-boundary lattice (edge set E_F); the approximate
posterior swaps Z_F for the periodic-boundary partition function Z_P while
keeping the free-boundary statistic:

    π̃(φ|y) ∝ exp(−φ f(y; E_F)) / Z_P(φ)    on [0, 2]

Both partition functions are computed exactly by a 2^N-state column
transfer matrix, so at desk scale the exact posterior is available as an
oracle. Periodic edges wrap around the torus; every cell has four incident
bonds, so on a 2×2 torus each neighbouring pair is joined twice.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from errors import ConfigError, SizeLimit
from models.base import ModelInterface
from models.grid_posterior import GridPosterior

logger = logging.getLogger(__name__)

MAX_TRANSFER_N = 12
PHI_MAX = 2.0
GRID_POINTS = 2001
DEFAULT_SWEEPS = 2000


class Boundary(str, Enum):
    """Lattice boundary condition."""
    FREE = "free"
    PERIODIC = "periodic"


@dataclass(eq=False)
class IsingLattice:
    """N×N field of 0/1 cells with a boundary tag."""
    cells: np.ndarray
    boundary: Boundary = Boundary.FREE

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise ValueError(f"lattice must be square, got shape {cells.shape}")
        if cells.shape[0] < 2:
            raise ValueError("lattice side must be at least 2")
        if not np.isin(cells, (0, 1)).all():
            raise ValueError("lattice cells must be 0 or 1")
        self.cells = cells.astype(np.uint8)
        self.boundary = Boundary(self.boundary)

    @property
    def N(self) -> int:
        return int(self.cells.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IsingLattice):
            return NotImplemented
        return self.boundary == other.boundary and np.array_equal(self.cells, other.cells)

    def to_text(self) -> str:
        return "\n".join("".join(str(int(c)) for c in row) for row in self.cells) + "\n"


def edge_count(N: int, boundary: Boundary) -> int:
    """|E| for the boundary's edge set."""
    return 2 * N * N if Boundary(boundary) == Boundary.PERIODIC else 2 * N * (N - 1)


def edge_discrepancy(lattice: IsingLattice, boundary: Optional[Boundary] = None) -> int:
    """
    Number of edges joining unequal cells, f(y; E).

    ``boundary`` overrides the lattice's own tag.
    """
    boundary = Boundary(boundary) if boundary is not None else lattice.boundary
    x = lattice.cells
    if boundary == Boundary.FREE:
        return int(np.count_nonzero(x[:, 1:] != x[:, :-1]) + np.count_nonzero(x[1:, :] != x[:-1, :]))
    return int(np.count_nonzero(x != np.roll(x, -1, axis=0)) + np.count_nonzero(x != np.roll(x, -1, axis=1)))


# ----------------------------------------------------------------------------
# Transfer matrix
# ----------------------------------------------------------------------------

def _column_states(N: int) -> np.ndarray:
    """Bits of every column state, shape (2^N, N)."""
    states = np.arange(2 ** N)
    return ((states[:, None] >> np.arange(N)[None, :]) & 1).astype(np.int8)


def _intra_column(N: int, boundary: Boundary) -> np.ndarray:
    """Unequal vertical bonds inside each column state."""
    bits = _column_states(N)
    if boundary == Boundary.FREE:
        return np.count_nonzero(bits[:, 1:] != bits[:, :-1], axis=1)
    return np.count_nonzero(bits != np.roll(bits, -1, axis=1), axis=1)


def _inter_column(N: int) -> np.ndarray:
    """Unequal horizontal bonds between two adjacent column states: popcount(a ^ b)."""
    bits = _column_states(N)
    return np.count_nonzero(bits[:, None, :] != bits[None, :, :], axis=2)


def _check_size(N: int) -> None:
    if N < 2:
        raise ValueError(f"lattice side must be at least 2, got {N}")
    if N > MAX_TRANSFER_N:
        raise SizeLimit(f"transfer matrix needs 2^N states; N={N} exceeds {MAX_TRANSFER_N}")


class _TransferOperator:
    """Precomputed bond counts for one (N, boundary)."""

    def __init__(self, N: int, boundary: Boundary):
        _check_size(N)
        self.N = N
        self.boundary = Boundary(boundary)
        self.intra = _intra_column(N, self.boundary).astype(float)
        self.inter = _inter_column(N).astype(float)

    def log_z(self, phi: float) -> float:
        if self.boundary == Boundary.FREE:
            return self._log_z_free(phi)
        return self._log_z_periodic(phi)

    def _log_z_free(self, phi: float) -> float:
        diag = np.exp(-phi * self.intra)
        transfer = np.exp(-phi * self.inter)
        v = diag.copy()
        log_scale = 0.0
        for _ in range(self.N - 1):
            v = (v @ transfer) * diag
            top = v.max()
            v /= top
            log_scale += math.log(top)
        return log_scale + math.log(v.sum())

    def _log_z_periodic(self, phi: float) -> float:
        # tr((D T)^N) = Σ λ^N for the symmetric D^½ T D^½
        half = np.exp(-0.5 * phi * self.intra)
        sym = half[:, None] * np.exp(-phi * self.inter) * half[None, :]
        eig = np.linalg.eigvalsh(sym)
        lead = eig[np.argmax(np.abs(eig))]
        ratio_sum = float(np.sum((eig / lead) ** self.N))
        return self.N * math.log(lead) + math.log(ratio_sum)


def log_partition(N: int, boundary: Union[Boundary, str], phi: float) -> float:
    """
    Exact log Z(φ) on the N×N lattice.

    Raises:
        SizeLimit: N > 12
    """
    return _TransferOperator(N, Boundary(boundary)).log_z(float(phi))


@dataclass(frozen=True)
class PartitionTable:
    """log Z tabulated on a uniform φ grid."""
    N: int
    boundary: Boundary
    phi_grid: np.ndarray
    log_z: np.ndarray

    @classmethod
    def build(
        cls,
        N: int,
        boundary: Union[Boundary, str],
        phi_max: float = PHI_MAX,
        grid_points: int = GRID_POINTS,
    ) -> "PartitionTable":
        boundary = Boundary(boundary)
        op = _TransferOperator(N, boundary)
        grid = np.linspace(0.0, phi_max, grid_points)
        values = np.array([op.log_z(phi) for phi in grid])
        logger.info(f"Built {boundary.value} partition table: N={N}, {grid_points} points on [0, {phi_max}]")
        return cls(N=N, boundary=boundary, phi_grid=grid, log_z=values)

    def __call__(self, phi: Any) -> np.ndarray:
        return np.interp(phi, self.phi_grid, self.log_z)


def posterior_grid(s_y: float, table: PartitionTable) -> GridPosterior:
    """
    Flat-prior posterior of φ given sufficient statistic ``s_y``.

    log π(φ|y) = −φ·s_y − log Z(φ) + const on the table's grid; the same
    values serve as log p(y|φ) for importance weights.
    """
    loglik = -table.phi_grid * float(s_y) - table.log_z
    return GridPosterior(table.phi_grid, loglik, log_likelihood_values=loglik)


# ----------------------------------------------------------------------------
# Single-site Gibbs sampler
# ----------------------------------------------------------------------------

def _neighbours(N: int, boundary: Boundary) -> List[List[int]]:
    """Flat-index neighbour lists; periodic lists keep duplicate bonds."""
    nbrs: List[List[int]] = []
    for r in range(N):
        for c in range(N):
            out = []
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                rr, cc = r + dr, c + dc
                if boundary == Boundary.PERIODIC:
                    out.append((rr % N) * N + (cc % N))
                elif 0 <= rr < N and 0 <= cc < N:
                    out.append(rr * N + cc)
            nbrs.append(out)
    return nbrs


def simulate_field(
    N: int,
    boundary: Union[Boundary, str],
    phi: float,
    sweeps: int,
    rng: np.random.Generator,
) -> IsingLattice:
    """
    Heat-bath Gibbs sampler in raster order from a uniform random start.

    Each update sets a cell to 1 with probability 1/(1 + exp(−φ(n₁ − n₀)))
    where n₁, n₀ count neighbours currently equal to 1 and 0.
    """
    if sweeps < 1:
        raise ValueError(f"sweeps must be >= 1, got {sweeps}")
    boundary = Boundary(boundary)
    nbrs = _neighbours(N, boundary)
    cells = rng.integers(0, 2, size=N * N).tolist()
    uniforms = rng.random((sweeps, N * N))

    # p1 indexed by n1 - n0 + 4
    p_one = [1.0 / (1.0 + math.exp(-phi * d)) for d in range(-4, 5)]
    for sweep in range(sweeps):
        u = uniforms[sweep].tolist()
        for site in range(N * N):
            n1 = 0
            nb = nbrs[site]
            for j in nb:
                n1 += cells[j]
            diff = 2 * n1 - len(nb)
            cells[site] = 1 if u[site] < p_one[diff + 4] else 0
    return IsingLattice(np.array(cells, dtype=np.uint8).reshape(N, N), boundary)


# ----------------------------------------------------------------------------
# Lattice text I/O
# ----------------------------------------------------------------------------

def parse_lattice(text: str, boundary: Union[Boundary, str] = Boundary.FREE) -> IsingLattice:
    """Parse rows of 0/1 characters; blank lines are ignored."""
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty lattice file")
    bad = {ch for row in rows for ch in row} - {"0", "1"}
    if bad:
        raise ValueError(f"lattice rows may only contain 0 and 1, found {sorted(bad)}")
    if len({len(row) for row in rows}) != 1:
        raise ValueError("lattice rows have unequal lengths")
    cells = np.array([[int(ch) for ch in row] for row in rows], dtype=np.uint8)
    return IsingLattice(cells, Boundary(boundary))


def read_lattice(path: Union[str, Path], boundary: Union[Boundary, str] = Boundary.FREE) -> IsingLattice:
    return parse_lattice(Path(path).read_text(), boundary)


def write_lattice(path: Union[str, Path], lattice: IsingLattice) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(lattice.to_text())
    return path


# ----------------------------------------------------------------------------
# Model
# ----------------------------------------------------------------------------

class IsingModel(ModelInterface):
    """
    Free-boundary Ising data with the periodic-boundary approximation.

    Every posterior (approximate and exact) depends on the data only through
    f(y; E_F) ∈ {0, ..., 2N(N−1)}, so all of them are tabulated up front and
    shared read-only between workers.
    """

    name = "ising"
    summary_dim = 1

    def __init__(
        self,
        N: int,
        sweeps: int = DEFAULT_SWEEPS,
        phi_max: float = PHI_MAX,
        grid_points: int = GRID_POINTS,
        approx_boundary: Union[Boundary, str] = Boundary.PERIODIC,
    ):
        if sweeps < 1:
            raise ConfigError(f"sweeps must be >= 1, got {sweeps}")
        if not phi_max > 0:
            raise ConfigError(f"phi_max must be positive, got {phi_max}")
        _check_size(N)
        self.N = int(N)
        self.sweeps = int(sweeps)
        self.phi_max = float(phi_max)
        self.approx_boundary = Boundary(approx_boundary)
        self.exact_table = PartitionTable.build(N, Boundary.FREE, phi_max, grid_points)
        if self.approx_boundary == Boundary.FREE:
            self.approx_table = self.exact_table
        else:
            self.approx_table = PartitionTable.build(N, self.approx_boundary, phi_max, grid_points)
        s_max = edge_count(N, Boundary.FREE)
        self._approx = [posterior_grid(s, self.approx_table) for s in range(s_max + 1)]
        self._exact = [posterior_grid(s, self.exact_table) for s in range(s_max + 1)]

    def statistic(self, y: IsingLattice) -> int:
        if y.N != self.N:
            raise ValueError(f"lattice side {y.N} does not match model N={self.N}")
        return edge_discrepancy(y, Boundary.FREE)

    def prior_sampler(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(0.0, self.phi_max))

    def data_simulator(self, phi: float, rng: np.random.Generator) -> IsingLattice:
        return simulate_field(self.N, Boundary.FREE, phi, self.sweeps, rng)

    def approx_posterior(self, y: IsingLattice) -> GridPosterior:
        return self._approx[self.statistic(y)]

    def exact_posterior(self, y: IsingLattice) -> GridPosterior:
        return self._exact[self.statistic(y)]

    def approx_posterior_at(self, s: int) -> GridPosterior:
        return self._approx[int(s)]

    def exact_posterior_at(self, s: int) -> GridPosterior:
        return self._exact[int(s)]

    def summary(self, y: IsingLattice) -> np.ndarray:
        return np.array([float(self.statistic(y))])

    def describe(self) -> Dict[str, Any]:
        return {
            "model": self.name,
            "ising_n": self.N,
            "sweeps": self.sweeps,
            "approx_boundary": self.approx_boundary.value,
        }
