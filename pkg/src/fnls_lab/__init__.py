"""Spectral lab for the fractional nonlinear Schrödinger equation on a periodic box."""

from .grid import ComplexField, Grid, GridError, PhysParams, make_grid
from .groundstate import GroundStateReport, ThresholdReport, classify_initial_data, petviashvili_solve
from .dynamics import EvolveConfig, TimeSeries, evolve, linear_propagate, nonlinear_phase_step, strang_step
from .checkpoint import CheckpointError, read_checkpoint, write_checkpoint

__version__ = "0.1.0"

__all__ = [
    "ComplexField",
    "Grid",
    "GridError",
    "PhysParams",
    "make_grid",
    "GroundStateReport",
    "ThresholdReport",
    "classify_initial_data",
    "petviashvili_solve",
    "EvolveConfig",
    "TimeSeries",
    "evolve",
    "linear_propagate",
    "nonlinear_phase_step",
    "strang_step",
    "CheckpointError",
    "read_checkpoint",
    "write_checkpoint",
]
