"""Madelung core - grids, fields, potentials and finite-difference operators."""

from .grid import DimSpec, GridError, GridSpec, make_grid
from .potential import PotentialKind, PotentialSpec, evaluate_potential
from .state import (
    ComplexField,
    DofParams,
    HydroState,
    StateError,
    coherent_state,
    double_gaussian,
    harmonic_ground_state,
    harmonic_width,
    plane_wave,
    sample_gaussian,
)
from .stencil import divergence, floored_density, gradient, log_derivative, spatial_derivative

__all__ = [
    "DimSpec",
    "GridError",
    "GridSpec",
    "make_grid",
    "PotentialKind",
    "PotentialSpec",
    "evaluate_potential",
    "ComplexField",
    "DofParams",
    "HydroState",
    "StateError",
    "coherent_state",
    "double_gaussian",
    "harmonic_ground_state",
    "harmonic_width",
    "plane_wave",
    "sample_gaussian",
    "divergence",
    "floored_density",
    "gradient",
    "log_derivative",
    "spatial_derivative",
]
