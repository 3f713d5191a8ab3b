"""Staggered-grid discretization and simulation of linear port-Hamiltonian PDEs."""
from .core import (
    BoundarySpec1D,
    BoundarySpec2D,
    CoefficientSet,
    ContinuousModel,
    ModelError,
    QuadraticDensity,
    coenergy,
    validate_model,
)
from .discretize import boundary_signals, discretize
from .interconnect import InterconnectionError, PortPairing, interconnect
from .models import MindlinParams, TimoshenkoParams, mindlin, timoshenko, wave_1d, wave_2d
from .simulate import (
    Signal,
    SolverError,
    Trajectory,
    midpoint_step,
    simulate,
    stack_inputs,
    static_equilibrium,
)
from .staggered1d import GridError, assemble_1d, build_grid_1d, discretize_1d
from .staggered2d import assemble_2d, build_grid_2d, discretize_2d, offsets_for
from .system import DiscreteSystem, hamiltonian

__all__ = [
    "BoundarySpec1D", "BoundarySpec2D", "CoefficientSet", "ContinuousModel", "DiscreteSystem",
    "GridError", "InterconnectionError", "MindlinParams", "ModelError", "PortPairing",
    "QuadraticDensity", "Signal", "SolverError", "TimoshenkoParams", "Trajectory",
    "assemble_1d", "assemble_2d", "boundary_signals", "build_grid_1d", "build_grid_2d",
    "coenergy", "discretize", "discretize_1d", "discretize_2d", "hamiltonian", "interconnect",
    "midpoint_step", "mindlin", "offsets_for", "simulate", "stack_inputs", "static_equilibrium",
    "timoshenko", "validate_model", "wave_1d", "wave_2d",
]
