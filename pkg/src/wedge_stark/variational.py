"""Zero-field spectrum and the one-parameter variational Stark calculation.

The trial state is the zero-field ground state times exp(-s*beta*x), where
x = rho*cos(theta) and s = +1 (field toward the wide part) or -1.  Its energy
is the Rayleigh quotient <Psi|H|Psi>/<Psi|Psi>.  The z factor cos(pi z/L) is
untouched by the trial exponential, so the 3D quotient splits into the
constant (pi/L)^2 plus 2D integrals over the cross-section.

Two evaluation paths are kept:

* ``"gradient"``: kinetic energy in weak form, integral of |grad Psi|^2;
* ``"identity"``: integrating by parts with -lap(Psi0) = E111*Psi0 gives
  E(beta) = E111 + beta^2 + s*f*<x>_beta, needing only density moments.

The minimizer works on the identity form (no large E111 offset in the
objective, hence less round-off) and reports the gradient-form energy at the
optimum as a diagnostic.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .model import FieldConfig, QuantumNumbers, Wedge, potential_sign
from .quadrature import QuadratureRule, adapt
from .specfun import bessel_j, bessel_j_prime, bessel_zero, first_zero

__all__ = [
    "GroundState",
    "VariationalResult",
    "BracketError",
    "TrialMoments",
    "level_energy",
    "ground_energy",
    "wavefunction",
    "trial_moments",
    "energy_at_beta",
    "minimize",
    "stark_shift",
    "ground_mean_x",
]

DEFAULT_REL_TOL = 1e-10
DEFAULT_TOL_BETA = 1e-8
_GOLD = 0.3819660112501051  # (3 - sqrt(5)) / 2


class BracketError(ArithmeticError):
    """The energy kept decreasing up to the largest admissible |beta|."""


@dataclass(frozen=True)
class GroundState:
    wedge: Wedge
    energy: float
    alpha: float
    n0: float

    @property
    def m0(self) -> float:
        return self.wedge.m0

    @property
    def k(self) -> float:
        """Radial wavenumber alpha/d."""
        return self.alpha / self.wedge.d


@dataclass(frozen=True)
class VariationalResult:
    beta_star: float
    energy: float
    shift: float
    mean_x: float
    evaluations: dict = dc_field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class TrialMoments:
    """Unnormalized 2D integrals of the trial state on one rule."""

    norm: float
    kinetic: float
    mean_x: float
    var_x: float


def level_energy(wedge: Wedge, qn: QuantumNumbers) -> float:
    """Zero-field level (alpha_{m',n}/d)^2 + (l*pi/L)^2."""
    alpha = bessel_zero(qn.order(wedge), qn.n).value
    return (alpha / wedge.d) ** 2 + (qn.l * math.pi / wedge.L) ** 2


@functools.lru_cache(maxsize=512)
def ground_energy(wedge: Wedge, rel_tol: float = DEFAULT_REL_TOL) -> GroundState:
    alpha = first_zero(wedge.m0).value
    energy = (alpha / wedge.d) ** 2 + wedge.axial_energy
    m0 = wedge.m0
    k = alpha / wedge.d

    def density(rho, theta):
        return bessel_j(m0, k * rho) ** 2 * np.cos(m0 * theta) ** 2

    area_integral, _ = adapt(wedge, density, rel_tol)
    # the z factor integrates to L/2
    n0 = math.sqrt(2.0 / (wedge.L * area_integral))
    return GroundState(wedge, energy, alpha, n0)


def wavefunction(gs: GroundState, rho, theta, z=0.0):
    """Normalized zero-field ground state; exactly zero on and outside the walls."""
    w = gs.wedge
    rho_a, theta_a, z_a = np.broadcast_arrays(
        np.asarray(rho, float), np.asarray(theta, float), np.asarray(z, float)
    )
    inside = (
        (rho_a >= 0.0) & (rho_a < w.d)
        & (np.abs(theta_a) < 0.5 * w.theta0)
        & (np.abs(z_a) < 0.5 * w.L)
    )
    out = np.zeros(rho_a.shape)
    if inside.any():
        r = rho_a[inside]
        out[inside] = (
            gs.n0
            * bessel_j(gs.m0, gs.k * r)
            * np.cos(gs.m0 * theta_a[inside])
            * np.cos(math.pi * z_a[inside] / w.L)
        )
    return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=128)
def _radial_table(m0: float, k: float, rule: QuadratureRule):
    arg = k * rule.rho
    radial = bessel_j(m0, arg)
    dradial = k * bessel_j_prime(m0, arg)
    # R/rho stays finite at the nodes (rho > 0), but compute it once here
    over_rho = radial / rule.rho
    for arr in (radial, dradial, over_rho):
        arr.setflags(write=False)
    return radial, dradial, over_rho


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta!r}")
    return beta


def _exponent_ceiling(wedge: Wedge, sbeta: float) -> float:
    x_max = wedge.d
    x_min = min(0.0, wedge.d * math.cos(0.5 * wedge.theta0))
    return max(-2.0 * sbeta * x_max, -2.0 * sbeta * x_min)


def _samples(gs: GroundState, sign: int, beta: float, rule: QuadratureRule, kinetic: bool):
    """Stacked samples [P, P*x, P*x^2 (, kinetic density)] times the weight g^2."""
    radial, dradial, over_rho = _radial_table(gs.m0, gs.k, rule)
    theta = rule.theta
    ang = np.cos(gs.m0 * theta)
    x = rule.rho[:, None] * np.cos(theta)[None, :]
    # rescale by the largest exponent over the whole wedge (not over the
    # nodes) so raw sums from different rules stay comparable
    g2 = np.exp(-2.0 * sign * beta * x - _exponent_ceiling(gs.wedge, sign * beta))
    p = (radial[:, None] * ang[None, :]) ** 2 * g2
    rows = [p, p * x, p * x * x]
    if kinetic:
        dang = -gs.m0 * np.sin(gs.m0 * theta)
        rad_part = dradial[:, None] * ang[None, :] - sign * beta * np.cos(theta)[None, :] * (
            radial[:, None] * ang[None, :]
        )
        ang_part = over_rho[:, None] * dang[None, :] + sign * beta * np.sin(theta)[None, :] * (
            radial[:, None] * ang[None, :]
        )
        rows.append((rad_part**2 + ang_part**2) * g2)
    return np.stack(rows)


def _moments_from_sums(sums: np.ndarray) -> TrialMoments:
    norm = float(sums[0])
    if not (norm > 0.0) or not math.isfinite(norm):
        raise OverflowError("trial-state norm under/overflowed; |beta|*d is too large")
    mean_x = float(sums[1]) / norm
    var_x = max(float(sums[2]) / norm - mean_x * mean_x, 0.0)
    kinetic = float(sums[3]) / norm if len(sums) > 3 else math.nan
    return TrialMoments(norm, kinetic, mean_x, var_x)


def trial_moments(gs: GroundState, field: FieldConfig, beta: float,
                  rule: QuadratureRule | None = None, *, kinetic: bool = True,
                  rel_tol: float = DEFAULT_REL_TOL) -> TrialMoments:
    """Norm, 2D kinetic quotient, <x> and Var(x) of the trial state.

    With ``rule=None`` the node count is adapted until all moments settle.
    """
    beta = _check_beta(beta)
    sign = potential_sign(field)
    if rule is not None:
        return _moments_from_sums(rule.sum(_samples(gs, sign, beta, rule, kinetic)))

    sums, _ = adapt(gs.wedge, lambda r: _samples(gs, sign, beta, r, kinetic),
                    rel_tol, on_rule=True)
    return _moments_from_sums(np.asarray(sums))


def energy_at_beta(gs: GroundState, field: FieldConfig, beta: float, *,
                   method: str = "gradient", rule: QuadratureRule | None = None,
                   rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Rayleigh quotient E(beta) of the trial state."""
    beta = _check_beta(beta)
    if method not in ("gradient", "identity"):
        raise ValueError(f"unknown method {method!r}")
    if beta == 0.0 and field.f == 0.0:
        return gs.energy
    mom = trial_moments(gs, field, beta, rule, kinetic=(method == "gradient"), rel_tol=rel_tol)
    potential = field.signed_strength * mom.mean_x
    if method == "gradient":
        return gs.wedge.axial_energy + mom.kinetic + potential
    return gs.energy + beta * beta + potential


def ground_mean_x(gs: GroundState, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """<rho cos(theta)> in the zero-field ground state."""
    return trial_moments(gs, FieldConfig(), 0.0, kinetic=False, rel_tol=rel_tol).mean_x


def _brent(fun, a: float, b: float, c: float, fb: float, tol: float, maxiter: int = 200):
    """Brent's golden-section / parabolic minimization on the bracket a<b<c.

    Returns (xmin, fmin, lo, hi, n_evals) where [lo, hi] is the final bracket.
    """
    lo, hi = min(a, c), max(a, c)
    x = w = v = b
    fx = fw = fv = fb
    d = e = 0.0
    nev = 0
    for _ in range(maxiter):
        xm = 0.5 * (lo + hi)
        tol1 = tol + 1e-12 * abs(x)
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (hi - lo):
            break
        use_golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            etemp = e
            e = d
            if abs(p) < abs(0.5 * q * etemp) and q * (lo - x) < p < q * (hi - x):
                d = p / q
                u = x + d
                if u - lo < tol2 or hi - u < tol2:
                    d = math.copysign(tol1, xm - x)
                use_golden = False
        if use_golden:
            e = (lo - x) if x >= xm else (hi - x)
            d = _GOLD * e
        u = x + d if abs(d) >= tol1 else x + math.copysign(tol1, d)
        fu = fun(u)
        nev += 1
        if fu <= fx:
            if u >= x:
                lo = x
            else:
                hi = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                lo = u
            else:
                hi = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx, lo, hi, nev


def _bracket(fun, limit: float):
    """Enclose a minimum starting from [0, 1], doubling the step downhill."""
    f0 = fun(0.0)
    f1 = fun(1.0)
    nev = 2
    if f1 < f0:
        step = 1.0
        a, fa, b, fb = 0.0, f0, 1.0, f1
    else:
        fm = fun(-1.0)
        nev += 1
        if fm >= f0:
            return (-1.0, 0.0, 1.0), f0, nev
        step = -1.0
        a, fa, b, fb = 0.0, f0, -1.0, fm
    while True:
        step *= 2.0
        c = b + step
        if abs(c) > limit:
            raise BracketError(
                f"energy still decreasing at beta={b:g} (limit |beta| <= {limit:g})"
            )
        fc = fun(c)
        nev += 1
        if fc > fb:
            trio = (a, b, c) if a < c else (c, b, a)
            return trio, fb, nev
        a, fa, b, fb = b, fb, c, fc


def _select_rule(gs: GroundState, field: FieldConfig, betas, rel_tol: float) -> QuadratureRule:
    """Smallest adapted rule that resolves the trial density at every beta given."""
    best = None
    sign = potential_sign(field)
    for beta in betas:
        _, rule = adapt(gs.wedge, lambda r, beta=beta: _samples(gs, sign, beta, r, False),
                        rel_tol, on_rule=True)
        if best is None or rule.n_rho > best.n_rho:
            best = rule
    return best


def minimize(gs: GroundState, field: FieldConfig, *, tol_beta: float = DEFAULT_TOL_BETA,
             rel_tol: float = DEFAULT_REL_TOL) -> VariationalResult:
    """Minimize E(beta) over the real line and form the Stark shift."""
    if field.f < 0:
        raise ValueError("field magnitude must be >= 0")
    if field.f == 0.0:
        mean_x = ground_mean_x(gs, rel_tol)
        return VariationalResult(0.0, gs.energy, 0.0, mean_x,
                                 {"n_evals": 0, "reason": "zero field: trial state is exact"})

    limit = 1e3 / gs.wedge.d
    strength = field.signed_strength
    f = field.f

    # exploratory pass with an adapted rule per point to find the bracket
    def explore(beta):
        return beta * beta + strength * trial_moments(
            gs, field, beta, kinetic=False, rel_tol=1e-8).mean_x

    trio, fb, nev_bracket = _bracket(explore, limit)
    rule = _select_rule(gs, field, (trio[0], trio[2], 0.0), rel_tol)

    def shift_of(beta):
        mom = trial_moments(gs, field, beta, rule, kinetic=False)
        return beta * beta + strength * mom.mean_x

    def slope_of(beta):
        mom = trial_moments(gs, field, beta, rule, kinetic=False)
        return 2.0 * beta - 2.0 * f * mom.var_x

    a, b, c = trio
    fb = shift_of(b)
    beta, s_beta, lo, hi, nev = _brent(shift_of, a, b, c, fb, tol_beta)

    # polish on dS/dbeta, which resolves beta far below the sqrt(eps) limit of S
    polished = False
    g_lo, g_hi = slope_of(lo), slope_of(hi)
    nev += 2
    if g_lo < 0.0 < g_hi:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi or hi - lo <= 1e-14 * max(1.0, abs(mid)):
                break
            if slope_of(mid) < 0.0:
                lo = mid
            else:
                hi = mid
            nev += 1
        cand = 0.5 * (lo + hi)
        s_cand = shift_of(cand)
        if s_cand <= s_beta + 1e-14 * max(1.0, abs(s_beta)):
            beta, s_beta = cand, s_cand
            polished = True

    s_zero = shift_of(0.0)
    if s_zero < s_beta:
        beta, s_beta = 0.0, s_zero

    mom = trial_moments(gs, field, beta, rule, kinetic=True)
    e_gradient = gs.wedge.axial_energy + mom.kinetic + strength * mom.mean_x
    energy = gs.energy + s_beta
    diagnostics = {
        "n_evals": nev + nev_bracket,
        "bracket": trio,
        "rule": (rule.n_rho, rule.n_theta, rule.radial_map),
        "polished": polished,
        "energy_gradient": e_gradient,
        "identity_gap": e_gradient - energy,
    }
    return VariationalResult(beta, energy, s_beta, mom.mean_x, diagnostics)


def stark_shift(wedge: Wedge, field: FieldConfig, **kwargs) -> VariationalResult:
    """Stark shift E(beta*) - E111 for one wedge and field."""
    return minimize(ground_energy(wedge), field, **kwargs)
