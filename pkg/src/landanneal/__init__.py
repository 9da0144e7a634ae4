"""Langevin annealing with landscape modification (overdamped and kinetic)."""

from .critheight import Grid1D, HeightResult, clipped_critical_height, critical_height
from .errors import (
    ConfigError,
    DensityUnderflowError,
    DimensionError,
    DivergenceError,
    NumericError,
    QuadratureError,
    UnsupportedError,
)
from .gibbs import DensityGrid, ProductLaw, density_1d, sample_product, tail_mass, tv_distance
from .harness import ExperimentConfig, ProbabilityCurve, run_experiment, stationarity_test, write_csv
from .integrators import MethodConfig, NoiseStream, kinetic_step, overdamped_step, simulate
from .landscape import FModifier, ModifiedLandscape, h_eval, landscape_grid, modified_drift
from .potentials import REGISTRY, Potential, get_potential
from .schedules import AdaptiveC, CoolingSchedule, StepSchedule, epsilon_at, mollified_runmin

__version__ = "0.1.0"

__all__ = [
    "AdaptiveC",
    "ConfigError",
    "CoolingSchedule",
    "DensityGrid",
    "DensityUnderflowError",
    "DimensionError",
    "DivergenceError",
    "ExperimentConfig",
    "FModifier",
    "Grid1D",
    "HeightResult",
    "MethodConfig",
    "ModifiedLandscape",
    "NoiseStream",
    "NumericError",
    "Potential",
    "ProbabilityCurve",
    "ProductLaw",
    "QuadratureError",
    "REGISTRY",
    "StepSchedule",
    "UnsupportedError",
    "clipped_critical_height",
    "critical_height",
    "density_1d",
    "epsilon_at",
    "get_potential",
    "h_eval",
    "kinetic_step",
    "landscape_grid",
    "modified_drift",
    "mollified_runmin",
    "overdamped_step",
    "run_experiment",
    "sample_product",
    "simulate",
    "stationarity_test",
    "tail_mass",
    "tv_distance",
    "write_csv",
]
