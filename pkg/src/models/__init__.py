"""
Models for calibration: interfaces, the tempered-normal oracle model, the
Ising lattice model and a discrete toy model.
"""

from .base import ModelInterface, Posterior, ApproxPosterior, DiscretePosterior
from .grid_posterior import GridPosterior
from .tempered_normal import TemperedNormalModel, NormalPosterior, exact_coverage, z_alpha
from .ising import (
    Boundary,
    IsingLattice,
    IsingModel,
    PartitionTable,
    edge_count,
    edge_discrepancy,
    log_partition,
    posterior_grid,
    simulate_field,
    parse_lattice,
    read_lattice,
    write_lattice,
)
from .discrete_toy import BinomialLabelModel

__all__ = [
    "ModelInterface",
    "Posterior",
    "ApproxPosterior",
    "DiscretePosterior",
    "GridPosterior",
    "TemperedNormalModel",
    "NormalPosterior",
    "exact_coverage",
    "z_alpha",
    "Boundary",
    "IsingLattice",
    "IsingModel",
    "PartitionTable",
    "edge_count",
    "edge_discrepancy",
    "log_partition",
    "posterior_grid",
    "simulate_field",
    "parse_lattice",
    "read_lattice",
    "write_lattice",
    "BinomialLabelModel",
]
