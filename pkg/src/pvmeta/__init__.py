"""Solar PV metadata inference by GP-UCB with a differentially private release."""

__version__ = "0.1.0"

from .bo import BoConfig, BoTrace, run_bo
from .data import (
    IrradianceSeries,
    Location,
    PowerProfile,
    SyntheticScenario,
    load_generation_csv,
    load_irradiance_csv,
    synthesize,
)
from .dp import DpParams, dp_release, exponential_mechanism, sensitivity_bound
from .fitscore import DomainGrid, FitObjective, grid_search
from .gp import KernelSpec
from .preprocess import preprocess
from .solar_model import PanelParams, SurfaceOrientation

__all__ = [
    "BoConfig", "BoTrace", "DomainGrid", "DpParams", "FitObjective", "IrradianceSeries",
    "KernelSpec", "Location", "PanelParams", "PowerProfile", "SurfaceOrientation",
    "SyntheticScenario", "dp_release", "exponential_mechanism", "grid_search",
    "load_generation_csv", "load_irradiance_csv", "preprocess", "run_bo",
    "sensitivity_bound", "synthesize",
]
