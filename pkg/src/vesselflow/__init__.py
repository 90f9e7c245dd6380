"""Incompressible Navier-Stokes-Fourier simulator for a closed vessel with
non-uniform wall temperature, plus the Lyapunov-functional diagnostics that
verify the unconditional decay of perturbations about the steady state."""

from .errors import (
    BlowUpError,
    ConfigError,
    PositivityError,
    SolverError,
    VesselflowError,
)
from .grid import Grid, ScalarField, SymGradField, VectorField, WallValues
from .steady import BoundaryProfile, SteadyState, poincare_constant, solve_steady_heat
from .thermo import ExponentPair, Material

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "BoundaryProfile",
    "ConfigError",
    "ExponentPair",
    "Grid",
    "Material",
    "PositivityError",
    "ScalarField",
    "SolverError",
    "SteadyState",
    "SymGradField",
    "VectorField",
    "VesselflowError",
    "WallValues",
    "poincare_constant",
    "solve_steady_heat",
    "__version__",
]
