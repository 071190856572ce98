"""Variational Stark effect of an electron in a wedge-shaped quantum box."""

from .model import (
    UNITS,
    Direction,
    FieldConfig,
    QuantumNumbers,
    ValidationError,
    Wedge,
    make_wedge,
    potential_sign,
)
from .specfun import bessel_j, bessel_j_prime, bessel_zero, first_max, first_zero
from .variational import (
    GroundState,
    VariationalResult,
    energy_at_beta,
    ground_energy,
    level_energy,
    minimize,
    stark_shift,
    wavefunction,
)
from .density import DensityGrid, density_grid, find_peaks
from .fd_oracle import FdSolution, compare, fd_ground

__all__ = [
    "UNITS", "Direction", "FieldConfig", "QuantumNumbers", "ValidationError", "Wedge",
    "make_wedge", "potential_sign",
    "bessel_j", "bessel_j_prime", "bessel_zero", "first_max", "first_zero",
    "GroundState", "VariationalResult", "energy_at_beta", "ground_energy", "level_energy",
    "minimize", "stark_shift", "wavefunction",
    "DensityGrid", "density_grid", "find_peaks",
    "FdSolution", "compare", "fd_ground",
]
