"""Ground-state density maps Psi^2(x, y, z=0) and their peak structure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from .model import FieldConfig, Wedge, potential_sign
from .quadrature import adapt
from .specfun import bessel_j
from .variational import VariationalResult, _exponent_ceiling, ground_energy, minimize

__all__ = ["Peak", "DensityGrid", "MIN_RESOLUTION", "density_grid", "find_peaks", "bounds"]

MIN_RESOLUTION = 64
PEAK_FLOOR = 0.01


class Peak(NamedTuple):
    x: float
    y: float
    height: float


@dataclass(frozen=True)
class DensityGrid:
    wedge: Wedge
    field: FieldConfig
    beta_star: float
    x: np.ndarray = dc_field(repr=False)
    y: np.ndarray = dc_field(repr=False)
    values: np.ndarray = dc_field(repr=False)  # values[i, j] at (x[i], y[j])
    normalization: float = 1.0
    peaks: tuple[Peak, ...] = ()

    @property
    def nx(self) -> int:
        return self.x.size

    @property
    def ny(self) -> int:
        return self.y.size

    @property
    def spacing(self) -> tuple[float, float]:
        return float(self.x[1] - self.x[0]), float(self.y[1] - self.y[0])

    def rows(self):
        """(x, y, density) triples, x outer and y inner."""
        for i, xv in enumerate(self.x):
            for j, yv in enumerate(self.y):
                yield float(xv), float(yv), float(self.values[i, j])


def bounds(wedge: Wedge) -> tuple[float, float, float, float]:
    """Cartesian box (x_min, x_max, y_min, y_max) enclosing the cross-section."""
    half = 0.5 * wedge.theta0
    x_min = min(0.0, wedge.d * math.cos(half))
    y_max = wedge.d * (math.sin(half) if half < 0.5 * math.pi else 1.0)
    return x_min, wedge.d, -y_max, y_max


def _density_function(wedge: Wedge, sbeta: float, norm_scale: float):
    gs = ground_energy(wedge)
    ceiling = _exponent_ceiling(wedge, sbeta)

    def density(rho, theta_abs):
        # theta enters only through |theta| so the map is exactly mirror-symmetric
        radial = bessel_j(gs.m0, gs.k * rho)
        ang = np.cos(gs.m0 * theta_abs)
        x = rho * np.cos(theta_abs)
        return (radial * ang) ** 2 * np.exp(-2.0 * sbeta * x - ceiling) / norm_scale

    return density


def density_grid(wedge: Wedge, field: FieldConfig, resolution: int = 256, *,
                 result: VariationalResult | None = None) -> DensityGrid:
    """Normalized trial density at the optimal beta on a (resolution+1)^2 grid.

    Sample counts are odd so that y = 0 is a grid row.
    """
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")
    if result is None:
        result = minimize(ground_energy(wedge), field)
    sbeta = potential_sign(field) * result.beta_star

    raw = _density_function(wedge, sbeta, 1.0)
    area, _ = adapt(wedge, lambda r, t: raw(r, np.abs(t)), 1e-10)
    # the z factor cos^2(pi z/L) integrates to L/2
    scale = area * 0.5 * wedge.L
    dens = _density_function(wedge, sbeta, scale)
    check, _ = adapt(wedge, lambda r, t: dens(r, np.abs(t)), 1e-10, start=48)
    normalization = check * 0.5 * wedge.L

    x_min, x_max, y_min, y_max = bounds(wedge)
    n = resolution + 1
    x = np.linspace(x_min, x_max, n)
    y = np.linspace(y_min, y_max, n)
    y = 0.5 * (y - y[::-1])  # exact antisymmetry, y[n//2] == 0
    xx, yy = np.meshgrid(x, y, indexing="ij")
    rho = np.hypot(xx, yy)
    theta_abs = np.arctan2(np.abs(yy), xx)
    inside = (rho < wedge.d) & (theta_abs < 0.5 * wedge.theta0) & (rho > 0.0)
    values = np.zeros_like(xx)
    values[inside] = dens(rho[inside], theta_abs[inside])

    grid = DensityGrid(wedge, field, result.beta_star, x, y, values, normalization)
    return DensityGrid(wedge, field, result.beta_star, x, y, values, normalization,
                       tuple(find_peaks(grid)))


def _refine(values: np.ndarray, i: int, j: int, hx: float, hy: float):
    """Quadratic fit on the 3x3 stencil around (i, j); returns (dx, dy, height)."""
    # closed-form least squares for c0 + cu u + cv v + cuu u^2 + cuv uv + cvv v^2 on
    # u, v in {-1, 0, 1}; a mirror-symmetric patch gives cv = cuv = 0 exactly
    p = values[i - 1:i + 2, j - 1:j + 2]
    rows, cols = p.mean(axis=1), p.mean(axis=0)
    cu = 0.5 * (rows[2] - rows[0])
    cv = 0.5 * (cols[2] - cols[0])
    cuu = 0.5 * (rows[0] + rows[2]) - rows[1]
    cvv = 0.5 * (cols[0] + cols[2]) - cols[1]
    cuv = 0.25 * ((p[2, 2] - p[2, 0]) - (p[0, 2] - p[0, 0]))
    c0 = p.mean() - (2.0 / 3.0) * (cuu + cvv)
    a, b, c = 2.0 * cuu, cuv, 2.0 * cvv
    det = a * c - b * b
    if det <= 0 or a >= 0:
        return 0.0, 0.0, float(values[i, j])
    du = (-cu * c + cv * b) / det
    dv = (-cv * a + cu * b) / det
    if abs(du) > 1.0 or abs(dv) > 1.0:
        return 0.0, 0.0, float(values[i, j])
    height = c0 + cu * du + cv * dv + cuu * du * du + cuv * du * dv + cvv * dv * dv
    return du * hx, dv * hy, float(max(height, values[i, j]))


def find_peaks(grid: DensityGrid) -> list[Peak]:
    """Strict 8-neighbour local maxima above 1% of the global maximum.

    Sorted by height (descending), ties broken by y so mirror pairs come out
    in a fixed order.
    """
    v = grid.values
    top = float(v.max()) if v.size else 0.0
    if top <= 0.0:
        return []
    core = v[1:-1, 1:-1]
    is_max = core > PEAK_FLOOR * top
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neigh = v[1 + di:v.shape[0] - 1 + di, 1 + dj:v.shape[1] - 1 + dj]
            is_max &= core > neigh
    hx, hy = grid.spacing
    peaks = []
    for i, j in np.argwhere(is_max):
        i, j = int(i) + 1, int(j) + 1
        dx, dy, height = _refine(v, i, j, hx, hy)
        peaks.append(Peak(float(grid.x[i] + dx), float(grid.y[j] + dy), height))
    peaks.sort(key=lambda p: (-p.height, p.y))
    return peaks
