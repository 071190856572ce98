"""Wedge geometry, field configuration and the reduced-unit convention.

Everything is expressed in effective atomic units: lengths in effective Bohr
radii a* = hbar^2 eps / (m* e^2), energies in effective Rydbergs
R* = m* e^4 / (2 hbar^2 eps^2) and fields in F0 = e / (2 eps a*^2), with
eps = 1.  In these units the Hamiltonian of the confined electron reads

    H = -laplacian + sign * f * rho * cos(theta)

inside the wedge and the infinite confining potential becomes a Dirichlet
condition on its boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

__all__ = [
    "UnitsConvention",
    "UNITS",
    "ValidationError",
    "Wedge",
    "make_wedge",
    "Direction",
    "FieldConfig",
    "potential_sign",
    "QuantumNumbers",
]


class ValidationError(ValueError):
    """Raised for out-of-range geometry, field or quantum-number inputs."""


@dataclass(frozen=True)
class UnitsConvention:
    length_unit: str = "a* (effective Bohr radius)"
    energy_unit: str = "R* (effective Rydberg)"
    field_unit: str = "F0 = e / (2 eps a*^2)"
    epsilon: float = 1.0
    # coefficients of -laplacian and of the field potential in reduced units
    kinetic_coefficient: float = 1.0
    field_coefficient: float = 1.0


UNITS = UnitsConvention()


@dataclass(frozen=True)
class Wedge:
    """Infinite-well box 0 <= rho <= d, |theta| <= theta0/2, |z| <= L/2."""

    d: float
    theta0: float
    L: float

    def __post_init__(self) -> None:
        for name in ("d", "theta0", "L"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"{name} must be a finite number, got {value!r}")
        if self.d <= 0:
            raise ValidationError(f"radius d must be > 0, got {self.d}")
        if self.L <= 0:
            raise ValidationError(f"thickness L must be > 0, got {self.L}")
        if not (0.0 < self.theta0 < 2.0 * math.pi):
            raise ValidationError(
                f"aperture theta0 must lie in (0, 2*pi), got {self.theta0}"
            )

    @property
    def m0(self) -> float:
        """Bessel order of the ground state, pi / theta0."""
        return math.pi / self.theta0

    @property
    def axial_energy(self) -> float:
        """Ground-state confinement energy of the z sector, (pi/L)^2."""
        return (math.pi / self.L) ** 2

    @property
    def is_packman(self) -> bool:
        return self.theta0 > math.pi

    def contains(self, rho: float, theta: float, z: float = 0.0) -> bool:
        return (
            0.0 <= rho <= self.d
            and abs(theta) <= 0.5 * self.theta0
            and abs(z) <= 0.5 * self.L
        )


def make_wedge(d: float, theta0: float, L: float) -> Wedge:
    return Wedge(float(d), float(theta0), float(L))


class Direction(enum.Enum):
    """Field direction along the wedge axis."""

    TOWARD_WIDE = "wide"  # +x; the electron is pushed into the tip
    TOWARD_TIP = "tip"  # -x; the electron is pushed toward the rim

    @classmethod
    def parse(cls, text: str) -> "Direction":
        key = text.strip().lower().replace("-", "_")
        aliases = {
            "wide": cls.TOWARD_WIDE,
            "toward_wide": cls.TOWARD_WIDE,
            "towardwide": cls.TOWARD_WIDE,
            "+x": cls.TOWARD_WIDE,
            "tip": cls.TOWARD_TIP,
            "toward_tip": cls.TOWARD_TIP,
            "towardtip": cls.TOWARD_TIP,
            "-x": cls.TOWARD_TIP,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValidationError(f"unknown field direction {text!r}") from None


@dataclass(frozen=True)
class FieldConfig:
    f: float = 0.0
    direction: Direction = Direction.TOWARD_WIDE

    def __post_init__(self) -> None:
        if not math.isfinite(self.f) or self.f < 0:
            raise ValidationError(f"field magnitude must be finite and >= 0, got {self.f}")
        if not isinstance(self.direction, Direction):
            raise ValidationError(f"direction must be a Direction, got {self.direction!r}")

    @property
    def sign(self) -> int:
        return potential_sign(self)

    @property
    def signed_strength(self) -> float:
        """Coefficient of x = rho cos(theta) in the potential."""
        return self.sign * self.f


def potential_sign(field: FieldConfig) -> int:
    """+1 for a field toward the wide part, -1 toward the tip (electron).

    A hole would carry the opposite sign; only electrons are modelled.
    """
    return 1 if field.direction is Direction.TOWARD_WIDE else -1


@dataclass(frozen=True)
class QuantumNumbers:
    n: int = 1
    n_theta: int = 0
    n_z: int = 0

    def __post_init__(self) -> None:
        if self.n < 1 or self.n_theta < 0 or self.n_z < 0:
            raise ValidationError(
                f"need n >= 1, n_theta >= 0, n_z >= 0; got {self.n, self.n_theta, self.n_z}"
            )

    @property
    def l(self) -> int:  # noqa: E743
        return 2 * self.n_z + 1

    def order(self, wedge: Wedge) -> float:
        """Bessel order m' = (2 n_theta + 1) pi / theta0."""
        return (2 * self.n_theta + 1) * math.pi / wedge.theta0
