import math

import numpy as np
import pytest

from wedge_stark.density import bounds, density_grid, find_peaks
from wedge_stark.model import Direction, FieldConfig, make_wedge
from wedge_stark.specfun import first_max, first_zero
from wedge_stark.variational import stark_shift

PI = math.pi
WIDE, TIP = Direction.TOWARD_WIDE, Direction.TOWARD_TIP


def test_bounds():
    assert bounds(make_wedge(2, PI / 2, 1)) == pytest.approx((0.0, 2.0, -math.sqrt(2), math.sqrt(2)))
    assert bounds(make_wedge(2, 3 * PI / 2, 1)) == pytest.approx((-math.sqrt(2), 2.0, -2.0, 2.0))


def test_resolution_floor():
    with pytest.raises(ValueError):
        density_grid(make_wedge(1, PI, 1), FieldConfig(), 32)


def test_normalized():
    g = density_grid(make_wedge(3, PI / 2, 1), FieldConfig(2.0, WIDE), 128)
    assert g.normalization == pytest.approx(1.0, abs=1e-10)


def test_cartesian_riemann_sum():
    # a crude midpoint check on the sampled map; the z factor contributes L/2
    w = make_wedge(2, PI / 2, 4)
    g = density_grid(w, FieldConfig(1.0, TIP), 512)
    hx, hy = g.spacing
    assert g.values.sum() * hx * hy * w.L / 2 == pytest.approx(1.0, abs=2e-3)


def test_zero_outside_and_on_walls():
    w = make_wedge(2, PI / 2, 1)
    g = density_grid(w, FieldConfig(1.0, WIDE), 64)
    xx, yy = np.meshgrid(g.x, g.y, indexing="ij")
    outside = (np.hypot(xx, yy) >= w.d) | (np.abs(np.arctan2(yy, xx)) >= w.theta0 / 2)
    assert (g.values[outside] == 0.0).all()
    assert (g.values >= 0.0).all()


@pytest.mark.parametrize("theta0,f", [(PI / 2, 3.0), (3 * PI / 2, 10.0), (PI / 20, 1.0)])
def test_mirror_symmetry_exact(theta0, f):
    g = density_grid(make_wedge(2, theta0, 1), FieldConfig(f, WIDE), 64)
    assert g.ny % 2 == 1 and g.y[g.ny // 2] == 0.0
    assert np.array_equal(g.values, g.values[:, ::-1])


def test_zero_field_peak_on_axis():
    # with beta = 0 the peak sits on the bisector at the first maximum of J_m0
    w = make_wedge(10, PI / 20, 1)
    g = density_grid(w, FieldConfig(0.0), 256)
    assert len(g.peaks) == 1
    p = g.peaks[0]
    assert p.y == 0.0
    expected = first_max(20.0) * w.d / first_zero(20.0).value
    assert p.x == pytest.approx(expected, abs=1e-3)


def test_peak_moves_toward_tip():
    w = make_wedge(10, PI / 20, 1)
    xs = [density_grid(w, FieldConfig(f, WIDE), 128).peaks[0].x for f in (0, 1, 5, 10)]
    assert all(b < a for a, b in zip(xs, xs[1:]))


def test_packman_double_peak():
    g = density_grid(make_wedge(2, 3 * PI / 2, 1), FieldConfig(10.0, WIDE), 256)
    assert len(g.peaks) == 2
    a, b = g.peaks
    assert a.height == pytest.approx(b.height, rel=1e-12)
    assert a.x == pytest.approx(b.x, abs=1e-12)
    assert a.y == pytest.approx(-b.y, abs=1e-12)


@pytest.mark.parametrize("f", [0.0, 0.5, 1.0])
def test_packman_single_peak_weak_field(f):
    g = density_grid(make_wedge(2, 3 * PI / 2, 1), FieldConfig(f, WIDE), 256)
    assert len(g.peaks) == 1
    assert g.peaks[0].y == 0.0


def test_packman_weak_field_pulls_peak_in():
    w = make_wedge(2, 3 * PI / 2, 1)
    x0 = density_grid(w, FieldConfig(0.0), 256).peaks[0].x
    x1 = density_grid(w, FieldConfig(0.5, WIDE), 256).peaks[0].x
    assert 0 < x1 < x0


def test_peak_stable_under_refinement():
    w = make_wedge(2, 3 * PI / 2, 1)
    fld = FieldConfig(10.0, WIDE)
    coarse = density_grid(w, fld, 128).peaks
    fine = density_grid(w, fld, 256).peaks
    hx, hy = density_grid(w, fld, 128).spacing
    assert len(coarse) == len(fine)
    for p, q in zip(coarse, fine):
        assert abs(p.x - q.x) < hx and abs(p.y - q.y) < hy
    assert abs(fine[0].y + fine[1].y) < hy


def test_uses_supplied_result():
    w = make_wedge(2, PI / 2, 1)
    fld = FieldConfig(1.0, WIDE)
    res = stark_shift(w, fld)
    assert density_grid(w, fld, 64, result=res).beta_star == res.beta_star


def test_find_peaks_on_flat_map():
    g = density_grid(make_wedge(1, PI, 1), FieldConfig(), 64)
    flat = type(g)(g.wedge, g.field, 0.0, g.x, g.y, np.zeros_like(g.values))
    assert find_peaks(flat) == []


def test_peak_fit_matches_generic_least_squares():
    from wedge_stark.density import _refine

    rng = np.random.default_rng(3)
    u = np.array([-1.0, 0.0, 1.0])
    uu, vv = np.meshgrid(u, u, indexing="ij")
    design = np.column_stack([np.ones(9), uu.ravel(), vv.ravel(), uu.ravel() ** 2,
                              (uu * vv).ravel(), vv.ravel() ** 2])
    for _ in range(20):
        c = rng.normal(size=4)
        patch = (5 - 2 * uu**2 - 1.5 * vv**2 + 0.3 * c[0] * uu * vv + 0.4 * c[1] * uu
                 + 0.4 * c[2] * vv + 0.05 * rng.normal(size=(3, 3)))
        co = np.linalg.lstsq(design, patch.ravel(), rcond=None)[0]
        hess = np.array([[2 * co[3], co[4]], [co[4], 2 * co[5]]])
        expected = np.linalg.solve(hess, -co[1:3])
        du, dv, _ = _refine(patch, 1, 1, 1.0, 1.0)
        np.testing.assert_allclose([du, dv], expected, atol=1e-12)
