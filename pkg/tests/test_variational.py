import csv
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from wedge_stark.model import Direction, FieldConfig, QuantumNumbers, make_wedge
from wedge_stark.quadrature import make_rule
from wedge_stark.variational import (
    energy_at_beta,
    ground_energy,
    ground_mean_x,
    level_energy,
    minimize,
    stark_shift,
    trial_moments,
    wavefunction,
)

PI = math.pi
WIDE, TIP = Direction.TOWARD_WIDE, Direction.TOWARD_TIP
DATA = Path(__file__).parent / "data" / "table1_reference.csv"


def reference_rows():
    with open(DATA, newline="") as fh:
        for row in csv.DictReader(fh):
            yield float(row["d"]), float(row["L"]), row["theta0_label"], float(row["energy"])


LABELS = {"pi/20": PI / 20, "pi/10": PI / 10, "pi/2": PI / 2, "pi": PI, "3pi/2": 3 * PI / 2}


class TestZeroField:
    @pytest.mark.parametrize("d,theta0,L,expected", [
        (1, PI / 20, 1, 655.90), (1, PI, 100, 14.68), (4, PI / 2, 10, 1.74),
        (10, 3 * PI / 2, 100, 0.11),
    ])
    def test_examples(self, d, theta0, L, expected):
        rounded = round(ground_energy(make_wedge(d, theta0, L)).energy, 2)
        assert abs(rounded - expected) <= 0.01 + 1e-9

    def test_reference_table_within_rounding(self):
        rows = list(reference_rows())
        assert len(rows) == 90
        for d, L, label, published in rows:
            e = ground_energy(make_wedge(d, LABELS[label], L)).energy
            assert abs(round(e, 2) - published) <= 0.01 + 1e-9, (d, L, label)

    def test_higher_level(self):
        w = make_wedge(1, PI / 2, 1)
        e = level_energy(w, QuantumNumbers(1, 0, 1))
        alpha = 5.135622301840683  # first zero of J_2
        # n_z = 1 gives the odd axial index l = 3
        assert e == pytest.approx(alpha**2 + (3 * PI) ** 2, rel=1e-12)
        assert e == pytest.approx(115.20, abs=0.01)
        assert level_energy(w, QuantumNumbers()) == pytest.approx(ground_energy(w).energy, rel=1e-14)
        half_disc = level_energy(make_wedge(1, PI, 1), QuantumNumbers(1, 0, 1))
        assert half_disc == pytest.approx(3.8317059702075125**2 + 9 * PI**2, rel=1e-12)
        assert half_disc == pytest.approx(103.51, abs=0.01)

    @pytest.mark.parametrize("theta0", [PI / 20, PI / 2, 3 * PI / 2])
    def test_wavefunction_normalized(self, theta0):
        w = make_wedge(2, theta0, 3)
        gs = ground_energy(w)
        rule = make_rule(w, 200)
        area = rule.sum(wavefunction(gs, rule.rho_grid, rule.theta_grid) ** 2)
        # the z profile cos^2(pi z/L) integrates to L/2 and the wavefunction is
        # evaluated at z = 0 here
        assert area * w.L / 2 == pytest.approx(1.0, rel=1e-10)

    def test_wavefunction_boundary_zero(self):
        w = make_wedge(2, PI / 2, 1)
        gs = ground_energy(w)
        assert wavefunction(gs, 2.0, 0.1) == 0.0
        assert wavefunction(gs, 1.0, PI / 4) == 0.0
        assert wavefunction(gs, 1.0, 0.0, 0.5) == 0.0
        assert wavefunction(gs, 3.0, 0.0) == 0.0
        assert abs(wavefunction(gs, 2.0 - 1e-9, 0.0)) < 1e-7
        assert wavefunction(gs, 1.0, 0.0) > 0

    def test_zero_field_minimum(self):
        for direction in (WIDE, TIP):
            res = stark_shift(make_wedge(3, PI / 2, 1), FieldConfig(0.0, direction))
            assert res.beta_star == 0.0
            assert res.shift == 0.0


class TestEnergyFunctional:
    def test_zero_field_beta_penalty(self):
        # with f = 0 the functional is E111 + beta^2
        gs = ground_energy(make_wedge(2, PI / 2, 1))
        e = energy_at_beta(gs, FieldConfig(0.0), 0.1)
        assert e == pytest.approx(gs.energy + 0.01, abs=1e-7)

    @pytest.mark.parametrize("theta0", [PI / 2, PI / 20, 3 * PI / 2])
    @pytest.mark.parametrize("beta", [-1.5, 0.3, 2.0])
    def test_identity_on_fixed_rules(self, theta0, beta):
        w = make_wedge(4, theta0, 1)
        gs = ground_energy(w)
        fld = FieldConfig(3.0, WIDE)
        rule = make_rule(w, 256)
        a = energy_at_beta(gs, fld, beta, rule=rule, method="gradient")
        b = energy_at_beta(gs, fld, beta, rule=rule, method="identity")
        assert a == pytest.approx(b, rel=1e-8)

    def test_norm_positive(self):
        gs = ground_energy(make_wedge(10, PI / 20, 1))
        mom = trial_moments(gs, FieldConfig(10.0, WIDE), 3.0)
        assert mom.norm > 0 and mom.var_x > 0

    @settings(max_examples=15, deadline=None)
    @given(beta=st.floats(-3.0, 3.0), f=st.floats(0.0, 10.0))
    def test_upper_bound_over_beta(self, beta, f):
        # every trial value lies above the minimum
        gs = ground_energy(make_wedge(5, PI / 2, 1))
        fld = FieldConfig(f, WIDE)
        res = minimize(gs, fld)
        assert energy_at_beta(gs, fld, beta, method="identity") >= res.energy - 1e-9

    def test_negative_beta_rejected_when_not_finite(self):
        gs = ground_energy(make_wedge(1, PI, 1))
        with pytest.raises(ValueError):
            energy_at_beta(gs, FieldConfig(1.0), math.inf)


class TestMinimize:
    @pytest.mark.parametrize("d,theta0,f,direction", [
        (1, PI / 20, 1.0, WIDE), (5, PI / 2, 10.0, WIDE), (10, 3 * PI / 2, 1.0, TIP),
        (2, PI, 0.5, TIP), (10, 3 * PI / 2, 10.0, WIDE),
    ])
    def test_agrees_with_scipy_brent(self, d, theta0, f, direction):
        gs = ground_energy(make_wedge(d, theta0, 1))
        fld = FieldConfig(f, direction)
        res = minimize(gs, fld)
        rule = make_rule(gs.wedge, *res.evaluations["rule"][:2], radial_map=res.evaluations["rule"][2])
        ref = minimize_scalar(
            lambda b: energy_at_beta(gs, fld, b, rule=rule, method="identity"),
            bracket=res.evaluations["bracket"][::2], tol=1e-10,
        )
        assert res.energy <= ref.fun + 1e-10
        assert res.beta_star == pytest.approx(ref.x, abs=1e-5)

    def test_energy_below_unperturbed_trial(self):
        gs = ground_energy(make_wedge(5, PI / 2, 1))
        fld = FieldConfig(10.0, WIDE)
        res = minimize(gs, fld)
        assert res.energy <= energy_at_beta(gs, fld, 0.0)

    def test_identity_gap_small(self):
        res = stark_shift(make_wedge(6, PI / 10, 1), FieldConfig(5.0, TIP))
        assert abs(res.evaluations["identity_gap"]) < 1e-7

    def test_narrow_wedge_signs(self):
        w = make_wedge(5, PI / 20, 1)
        assert stark_shift(w, FieldConfig(1.0, WIDE)).shift > 0
        assert stark_shift(w, FieldConfig(1.0, TIP)).shift < 0

    def test_direction_of_beta(self):
        wide = stark_shift(make_wedge(5, PI / 2, 1), FieldConfig(1.0, WIDE))
        tip = stark_shift(make_wedge(5, PI / 2, 1), FieldConfig(1.0, TIP))
        assert wide.beta_star > 0 and tip.beta_star > 0
        assert wide.mean_x < tip.mean_x

    def test_small_field_slope(self):
        # first-order perturbation: dE/df at f = 0 equals s <x>_0
        w = make_wedge(3, PI / 2, 1)
        gs = ground_energy(w)
        x0 = ground_mean_x(gs)
        f = 1e-3
        for direction, s in ((WIDE, 1), (TIP, -1)):
            slope = stark_shift(w, FieldConfig(f, direction)).shift / f
            assert slope == pytest.approx(s * x0, rel=1e-2)

    @pytest.mark.parametrize("theta0", [PI / 20, PI / 2, 3 * PI / 2])
    def test_shift_concave_in_field(self, theta0):
        # minimum over beta of affine functions of f is concave
        w = make_wedge(4, theta0, 1)
        fs = np.linspace(0.0, 10.0, 6)
        shifts = [stark_shift(w, FieldConfig(f, WIDE)).shift for f in fs]
        second = np.diff(shifts, 2)
        assert (second <= 1e-9).all()

    def test_tip_shift_monotone_in_field(self):
        w = make_wedge(5, PI / 10, 1)
        shifts = [stark_shift(w, FieldConfig(f, TIP)).shift for f in (0.5, 1, 2, 5, 10)]
        assert all(b < a for a, b in zip(shifts, shifts[1:]))

    def test_angular_trend_wide(self):
        shifts = [stark_shift(make_wedge(5, t, 1), FieldConfig(1.0, WIDE)).shift
                  for t in (PI / 20, PI / 10, PI / 2)]
        assert shifts[0] > shifts[1] > shifts[2] > 0

    @pytest.mark.parametrize("d,theta0,f,direction", [
        (1, PI / 20, 1.0, WIDE), (5, 3 * PI / 2, 10.0, WIDE), (10, PI / 2, 0.5, TIP),
    ])
    def test_thickness_independent(self, d, theta0, f, direction):
        a = stark_shift(make_wedge(d, theta0, 1), FieldConfig(f, direction)).shift
        b = stark_shift(make_wedge(d, theta0, 37), FieldConfig(f, direction)).shift
        assert abs(a - b) < 1e-6

    def test_packman_crossover(self):
        fld = FieldConfig(10.0, WIDE)
        assert stark_shift(make_wedge(1, 3 * PI / 2, 1), fld).shift > 0
        assert stark_shift(make_wedge(10, 3 * PI / 2, 1), fld).shift < 0

    def test_deterministic(self):
        w = make_wedge(7, PI / 10, 1)
        a = stark_shift(w, FieldConfig(3.0, TIP))
        b = stark_shift(w, FieldConfig(3.0, TIP))
        assert (a.beta_star, a.energy) == (b.beta_star, b.energy)
