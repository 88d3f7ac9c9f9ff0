"""Quantum stationary Hamilton-Jacobi toolkit.

Solves the one-dimensional stationary Schrodinger equation for a pair of
real basis solutions, builds the reduced action and amplitude of a chosen
microstate, maps between wavefunction coefficients and microstates,
computes trajectory time via Jacobi's theorem, and checks conserved
currents on 3D grids.
"""
__version__ = "0.1.0"

from .schrodinger import (BasisPair, Constants, Grid, Potential, find_eigenvalues, free,
                          harmonic, linear, polynomial, solve_basis, square_well, tabulated)
from .reduced_action import (BranchTrackingError, DegenerateMicrostateError, Microstate,
                             ReducedActionField, reduced_action)
from .microstates import (CoefficientPair, Decomposition, coeffs_from_decomposition, decompose,
                          gauge_transform)
from .trajectories import Trajectory, jacobi_time, microstate_family
from .field3d import Grid3, TensorField3, VectorField3

__all__ = [
    "__version__",
    "BasisPair", "Constants", "Grid", "Potential", "find_eigenvalues", "free", "harmonic",
    "linear", "polynomial", "solve_basis", "square_well", "tabulated",
    "BranchTrackingError", "DegenerateMicrostateError", "Microstate", "ReducedActionField",
    "reduced_action",
    "CoefficientPair", "Decomposition", "coeffs_from_decomposition", "decompose",
    "gauge_transform",
    "Trajectory", "jacobi_time", "microstate_family",
    "Grid3", "TensorField3", "VectorField3",
]
