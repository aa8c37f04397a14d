"""Changepoint detection for series with random-walk drift and AR(1) noise.

The estimated mean is allowed to drift as a random walk between abrupt
changes while the residuals follow a stationary AR(1) process; detection
minimises a penalised weighted least-squares cost exactly with a functional
dynamic program over piecewise quadratics.
"""

from .errors import (
    DegenerateDataError,
    InvalidDataError,
    InvalidParameterError,
    StructuralError,
)
from .estimation import EstimatedParams, LagVarianceProfile, estimate
from .evaluate import EvalReport, match_changepoints
from .simulate import ScenarioSpec, SimulatedSeries, generate
from .solver import (
    ModelParams,
    Segmentation,
    SolverConfig,
    extract_changepoints,
    penalised_cost,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateDataError",
    "EstimatedParams",
    "EvalReport",
    "InvalidDataError",
    "InvalidParameterError",
    "LagVarianceProfile",
    "ModelParams",
    "ScenarioSpec",
    "Segmentation",
    "SimulatedSeries",
    "SolverConfig",
    "StructuralError",
    "estimate",
    "extract_changepoints",
    "generate",
    "match_changepoints",
    "penalised_cost",
    "solve",
    "__version__",
]
