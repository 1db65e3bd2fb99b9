"""Direct and inverse scattering transforms for the matrix Schrodinger
equation on the half line with general selfadjoint boundary conditions."""

from ._kernels import BACKEND
from .types import (
    BoundaryCondition,
    BoundState,
    JostBundle,
    MarchenkoKernel,
    Potential,
    ScatteringData,
    boundary_equivalent,
    classify_boundary,
    make_bound_state,
    make_potential,
    validate_boundary,
    validate_potential,
    validate_scattering_data,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundaryCondition",
    "BoundState",
    "JostBundle",
    "MarchenkoKernel",
    "Potential",
    "ScatteringData",
    "boundary_equivalent",
    "classify_boundary",
    "make_bound_state",
    "make_potential",
    "validate_boundary",
    "validate_potential",
    "validate_scattering_data",
]
