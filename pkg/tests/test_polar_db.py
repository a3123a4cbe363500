import math

import numpy as np
import pytest

from metamorph.polar_db import (
    BLEND_BAND,
    EmptyPolar,
    EmptySurface,
    MalformedRow,
    MissingColumn,
    MissingReynoldsHeader,
    NonMonotonicAlpha,
    PolarCurve,
    PolarError,
    PolarPoint,
    PolarSurface,
    curves_from,
    flat_plate_coeffs,
    format_polar,
    load_surface,
    lookup_coeffs,
    parse_polar_file,
)

XFLR5 = """xflr5 v6.61

 Calculated polar for: E387

 1 1 Reynolds number fixed          Mach number fixed

 xtrf =   1.000 (top)        1.000 (bottom)
 Mach =   0.000     Re =     0.100 e 6     Ncrit =   9.000

  alpha      CL        CD       CDp       Cm    Top Xtr  Bot Xtr
 ------- -------- --------- --------- -------- -------- --------
  -1.000   0.2810   0.01100   0.00500  -0.0800   0.6000   0.9000
   0.000   0.3921   0.01012   0.00400  -0.0821   0.5800   0.9100
   1.000   0.5020   0.01050   0.00420  -0.0830   0.5500   0.9200
"""


def test_reynolds_header_parsed():
    assert parse_polar_file(XFLR5).reynolds == 100000.0


def test_reynolds_header_whitespace_tolerant():
    text = XFLR5.replace("Re =     0.100 e 6", "Re=0.25e6")
    assert parse_polar_file(text).reynolds == 250000.0


def test_columns_selected_by_name():
    curve = parse_polar_file(XFLR5)
    assert curve.points[1] == PolarPoint(0.0, 0.3921, 0.01012, -0.0821)


def test_columns_in_other_order():
    text = XFLR5.replace("alpha      CL        CD       CDp       Cm", "alpha      CL        CD       Cm       CDp")
    assert parse_polar_file(text).points[1].c_m == 0.004


def test_bytes_input():
    assert parse_polar_file(XFLR5.encode()).reynolds == 1e5


def test_duplicate_alpha_rejected():
    text = XFLR5.replace("   1.000   0.5020", "   0.000   0.5020")
    with pytest.raises(NonMonotonicAlpha):
        parse_polar_file(text)


def test_missing_header():
    with pytest.raises(MissingReynoldsHeader):
        parse_polar_file(XFLR5.replace("Re =", "Rx ="))


def test_missing_column():
    with pytest.raises(MissingColumn) as exc:
        parse_polar_file(XFLR5.replace("Cm  ", "Cx  "))
    assert "Cm" in str(exc.value)


def test_empty_polar():
    head = XFLR5.split(" -1.000")[0]
    with pytest.raises(EmptyPolar):
        parse_polar_file(head)


def test_malformed_row_reports_line():
    text = XFLR5.replace("0.3921", "abc")
    with pytest.raises(MalformedRow) as exc:
        parse_polar_file(text)
    assert exc.value.line == 13


def test_non_finite_rows_rejected():
    text = XFLR5.replace("   1.000   0.5020   0.01050", "   1.000   nan   0.01050") + "   2.000 0.6 0.011 0.004 -0.08 0.5 0.9\n"
    curve = parse_polar_file(text)
    assert [p.alpha for p in curve.points] == [-1.0, 0.0, 2.0]
    assert curve.rejected_lines == (14,)


def test_too_few_points():
    with pytest.raises(EmptyPolar):
        PolarCurve(1e5, (PolarPoint(0, 0, 0.01, 0), PolarPoint(1, 0.1, 0.01, 0)))


def test_round_trip_bit_exact():
    rng = np.random.default_rng(3)
    pts = tuple(PolarPoint(float(a), *map(float, rng.normal(size=3) * [1, 0, 0.1] + [0, 0.02, 0])) for a in np.sort(rng.uniform(-15, 15, 20)))
    curve = PolarCurve(123456.789, pts)
    again = parse_polar_file(format_polar(curve))
    assert again == curve
    assert again.reynolds == curve.reynolds


def test_lookup_exact_at_nodes(polars):
    surf = polars.cruise
    for curve in surf.curves:
        for p in curve.points[::7]:
            got = lookup_coeffs(surf, curve.reynolds, math.radians(p.alpha))
            assert got == (p.c_l, p.c_d, p.c_m)


def test_lookup_midpoint_is_mean(polars):
    surf = polars.cruise
    curve = surf.curves[2]
    for a, b in zip(curve.points[10:20], curve.points[11:21]):
        got = lookup_coeffs(surf, curve.reynolds, 0.5 * (math.radians(a.alpha) + math.radians(b.alpha)))
        want = (0.5 * (a.c_l + b.c_l), 0.5 * (a.c_d + b.c_d), 0.5 * (a.c_m + b.c_m))
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-9)


def test_lookup_linear_in_log_reynolds(polars):
    surf = polars.cruise
    lo, hi = surf.curves[1], surf.curves[2]
    re_mid = math.sqrt(lo.reynolds * hi.reynolds)
    a = math.radians(lo.points[40].alpha)
    want = 0.5 * (np.array(lookup_coeffs(surf, lo.reynolds, a)) + np.array(lookup_coeffs(surf, hi.reynolds, a)))
    np.testing.assert_allclose(lookup_coeffs(surf, re_mid, a), want, atol=1e-12)


def test_reynolds_clamped(polars):
    surf = polars.cruise
    a = 0.05
    assert lookup_coeffs(surf, 10.0, a) == lookup_coeffs(surf, surf.reynolds[0], a)
    assert lookup_coeffs(surf, 1e9, a) == lookup_coeffs(surf, surf.reynolds[-1], a)


def test_symmetric_surface_odd_even(symmetric_surface):
    for a in np.radians(np.linspace(0.0, 180.0, 361)):
        cp = lookup_coeffs(symmetric_surface, 1e5, a)
        cn = lookup_coeffs(symmetric_surface, 1e5, -a)
        assert abs(cp[0] + cn[0]) < 1e-9
        assert abs(cp[1] - cn[1]) < 1e-9
        assert abs(cp[2] + cn[2]) < 1e-9


def test_flat_plate_examples():
    assert flat_plate_coeffs(0.0) == (0.0, 0.02, 0.0)
    cl, cd, cm = flat_plate_coeffs(math.pi / 2)
    assert abs(cl) < 1e-15 and cd == pytest.approx(2.02, abs=1e-15) and cm == pytest.approx(-0.5, abs=1e-15)
    assert flat_plate_coeffs(-math.pi / 4)[0] == pytest.approx(-1.0, abs=1e-15)


def test_flat_plate_parity_on_degree_grid():
    a = np.radians(np.arange(-180, 181))
    cl, cd, cm = flat_plate_coeffs(a)
    ncl, ncd, ncm = flat_plate_coeffs(-a)
    np.testing.assert_allclose(cl, -ncl, atol=1e-15)
    np.testing.assert_allclose(cd, ncd, atol=1e-15)
    np.testing.assert_allclose(cm, -ncm, atol=1e-15)


def test_blend_reaches_flat_plate_past_band(polars):
    surf = polars.cruise
    a = surf.curves[0].alpha_max + BLEND_BAND + 0.01
    np.testing.assert_allclose(lookup_coeffs(surf, surf.reynolds[0], a), flat_plate_coeffs(a), atol=1e-15)


def test_blend_continuous_at_table_edge(polars):
    surf = polars.cruise
    edge = surf.curves[0].alpha_max
    inside = lookup_coeffs(surf, 3e4, edge)
    outside = lookup_coeffs(surf, 3e4, edge + 1e-9)
    np.testing.assert_allclose(inside, outside, atol=1e-8)


def test_array_lookup_matches_scalar(polars):
    rng = np.random.default_rng(0)
    re = 10 ** rng.uniform(3.5, 6.5, 200)
    al = rng.uniform(-math.pi, math.pi, 200)
    for surf in (polars.cruise, polars.hover):
        arr = lookup_coeffs(surf, re, al)
        for k in range(0, 200, 17):
            np.testing.assert_allclose([c[k] for c in arr], lookup_coeffs(surf, re[k], al[k]), atol=1e-15)


def test_shared_grid_route_matches_general_route(polars):
    surf = polars.cruise
    assert surf.shared_alpha is not None
    # dropping one point from the lowest curve breaks the shared grid
    curves = surf.curves
    general = PolarSurface(
        "y", (PolarCurve(curves[0].reynolds, curves[0].points[1:]),) + tuple(curves[1:])
    )
    assert general.shared_alpha is None
    rng = np.random.default_rng(1)
    re = 10 ** rng.uniform(4.5, 6, 500)
    al = rng.uniform(-0.2, 0.3, 500)
    mask = re > curves[1].reynolds
    a = np.array(lookup_coeffs(surf, re[mask], al[mask]))
    b = np.array(lookup_coeffs(general, re[mask], al[mask]))
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_empty_surface():
    with pytest.raises(EmptySurface):
        lookup_coeffs(PolarSurface("none", ()), 1e5, 0.0)


def test_duplicate_reynolds_rejected():
    rows = [(0, 0, 0.01, 0), (1, 0.1, 0.01, 0), (2, 0.2, 0.01, 0)]
    with pytest.raises(PolarError):
        PolarSurface("dup", curves_from([(1e5, rows), (1e5, rows)]))


def test_load_surface(tmp_path, polars):
    with pytest.raises(PolarError):
        load_surface(tmp_path / "missing")
    with pytest.raises(EmptySurface):
        load_surface(tmp_path)
    assert polars.cruise.reynolds == sorted(polars.cruise.reynolds)
    assert len(polars.cruise.curves) == 6


def test_full_range_finite_and_continuous(polars):
    a = np.radians(np.arange(-1800, 1801) / 10.0)
    for surf in (polars.cruise, polars.hover):
        for re in (1e4, 1e5, 1e6):
            c = np.array(lookup_coeffs(surf, np.full_like(a, re), a))
            assert np.all(np.isfinite(c))
            assert np.abs(np.diff(c, axis=1)).max() < 0.05
