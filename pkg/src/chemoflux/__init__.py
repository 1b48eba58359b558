"""Finite-volume solver and analysis tools for a two-population cross-chemotaxis model."""
from .errors import (AssumptionError, BoundUnavailableError, ChemofluxError, ConfigError,
                     DivergenceError, IllConditionedError, MeshError, NoSteadyStateError)
from .mesh import Mesh, build_mesh
from .model import (InitialData, ModelFunctions, Parameters, State, figure1_preset,
                    validate)
from .solver import SolverConfig, Trajectory, simulate, step

__version__ = "0.1.0"

__all__ = [
    "AssumptionError", "BoundUnavailableError", "ChemofluxError", "ConfigError",
    "DivergenceError", "IllConditionedError", "MeshError", "NoSteadyStateError",
    "Mesh", "build_mesh", "InitialData", "ModelFunctions", "Parameters", "State",
    "figure1_preset", "validate", "SolverConfig", "Trajectory", "simulate", "step",
    "__version__",
]
