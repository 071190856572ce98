"""Tensor-product Gauss-Legendre integration over the wedge cross-section.

Integrands are callables ``f(rho, theta)`` evaluated on broadcast node grids
of shape (n_rho, 1) and (1, n_theta).  They may return extra leading axes to
integrate several quantities on the same rule.  The polar Jacobian rho is
applied here, never by the caller.

For apertures beyond pi the ground state behaves like rho**m0 with m0 < 1,
so gradient integrands carry a rho**(2 m0 - 1) endpoint singularity.  The
``"quadratic"`` radial map (rho = d u^2, Gauss-Legendre in u) smooths it out.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .model import Wedge

__all__ = [
    "QuadratureError",
    "QuadratureRule",
    "make_rule",
    "default_radial_map",
    "integrate",
    "adapt",
]

START_NODES = 32
MAX_NODES = 512


class QuadratureError(ArithmeticError):
    pass


@functools.lru_cache(maxsize=64)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    n_rho: int
    n_theta: int
    d: float
    theta0: float
    radial_map: str
    rho: np.ndarray = field(repr=False, compare=False)
    w_rho: np.ndarray = field(repr=False, compare=False)
    theta: np.ndarray = field(repr=False, compare=False)
    w_theta: np.ndarray = field(repr=False, compare=False)

    @property
    def rho_grid(self) -> np.ndarray:
        return self.rho[:, None]

    @property
    def theta_grid(self) -> np.ndarray:
        return self.theta[None, :]

    @property
    def weights(self) -> np.ndarray:
        """Tensor weights for d(rho) d(theta), without the Jacobian."""
        return self.w_rho[:, None] * self.w_theta[None, :]

    def sum(self, values: np.ndarray) -> np.ndarray:
        """Apply the rule (with Jacobian rho) to sampled values."""
        jw = (self.w_rho * self.rho)[:, None] * self.w_theta[None, :]
        return np.sum(values * jw, axis=(-2, -1))


def default_radial_map(wedge: Wedge) -> str:
    return "linear" if wedge.m0 >= 1.0 else "quadratic"


@functools.lru_cache(maxsize=256)
def _cached_rule(n_rho, n_theta, d, theta0, radial_map) -> QuadratureRule:
    if n_rho < 1 or n_theta < 1:
        raise ValueError(f"node counts must be positive, got {n_rho}x{n_theta}")
    xr, wr = _gauss_legendre(n_rho)
    if radial_map == "linear":
        rho = 0.5 * d * (xr + 1.0)
        w_rho = 0.5 * d * wr
    elif radial_map == "quadratic":
        u = 0.5 * (xr + 1.0)
        rho = d * u * u
        w_rho = 0.5 * wr * (2.0 * d * u)
    else:
        raise ValueError(f"unknown radial map {radial_map!r}")
    xt, wt = _gauss_legendre(n_theta)
    theta = 0.5 * theta0 * xt
    w_theta = 0.5 * theta0 * wt
    for arr in (rho, w_rho, theta, w_theta):
        arr.setflags(write=False)
    return QuadratureRule(n_rho, n_theta, d, theta0, radial_map, rho, w_rho, theta, w_theta)


def make_rule(wedge: Wedge, n_rho: int, n_theta: int | None = None,
              radial_map: str | None = None) -> QuadratureRule:
    if n_theta is None:
        n_theta = n_rho
    if radial_map is None:
        radial_map = default_radial_map(wedge)
    return _cached_rule(int(n_rho), int(n_theta), wedge.d, wedge.theta0, radial_map)


def _sample(wedge: Wedge, integrand, rule: QuadratureRule, on_rule: bool = False) -> np.ndarray:
    if rule.d != wedge.d or rule.theta0 != wedge.theta0:
        raise ValueError("quadrature rule was built for a different wedge")
    raw = integrand(rule) if on_rule else integrand(rule.rho_grid, rule.theta_grid)
    values = np.asarray(raw, dtype=float)
    values = np.broadcast_to(values, values.shape[:-2] + (rule.n_rho, rule.n_theta))
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.argwhere(bad)[0]
        i, j = idx[-2], idx[-1]
        raise QuadratureError(
            f"non-finite integrand at node rho={rule.rho[i]!r}, theta={rule.theta[j]!r}"
        )
    return values


def _as_result(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def integrate(wedge: Wedge, integrand, rule: QuadratureRule):
    """Sum of w_i * integrand(rho_i, theta_i) * rho_i over the rule."""
    return _as_result(rule.sum(_sample(wedge, integrand, rule)))


def adapt(wedge: Wedge, integrand, rel_tol: float = 1e-10, *,
          start: int = START_NODES, max_nodes: int = MAX_NODES,
          radial_map: str | None = None, on_rule: bool = False,
          history: list | None = None):
    """Double node counts until two successive values agree within rel_tol.

    Agreement is measured against the integral of |integrand| so integrals
    that cancel to ~0 still terminate.  Returns ``(value, rule)``.  With
    ``on_rule=True`` the integrand is called as ``integrand(rule)`` so it can
    reuse per-rule tables.  Successive estimates are appended to ``history``
    when a list is supplied.
    """
    if not (rel_tol > 0):
        raise ValueError(f"rel_tol must be > 0, got {rel_tol!r}")
    n = start
    rule = make_rule(wedge, n, radial_map=radial_map)
    prev = rule.sum(_sample(wedge, integrand, rule, on_rule))
    if history is None:
        history = []
    history.append(_as_result(prev))
    while True:
        n *= 2
        if n > max_nodes:
            raise QuadratureError(
                f"no convergence at {n // 2}x{n // 2} nodes (rel_tol={rel_tol}); "
                f"last two values {history[-2:]!r}"
            )
        rule = make_rule(wedge, n, radial_map=radial_map)
        values = _sample(wedge, integrand, rule, on_rule)
        cur = rule.sum(values)
        scale = rule.sum(np.abs(values))
        history.append(_as_result(cur))
        if np.all(np.abs(cur - prev) <= rel_tol * scale):
            return _as_result(cur), rule
        prev = cur
