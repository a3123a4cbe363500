import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from metamorph.aero import ActuationInput, total_aero_loads
from metamorph.dynamics import RigidBodyState
from metamorph.frames import (
    euler_from_matrix,
    matrix_to_quat,
    quat_from_euler,
    quat_to_matrix,
    wrap_angle,
)
from metamorph.polar_db import PolarCurve, PolarPoint, format_polar, lookup_coeffs, parse_polar_file
from metamorph.propulsion import thrust_load
from metamorph.scenario import mirror_actuation, mirror_state, thrust_total

angle = st.floats(-math.pi, math.pi, allow_nan=False)
finite = st.floats(-1e3, 1e3, allow_nan=False)
vec3 = st.tuples(finite, finite, finite)
joint = st.floats(-1.5, 1.5, allow_nan=False)


@st.composite
def curves(draw):
    n = draw(st.integers(3, 30))
    alphas = sorted(draw(st.sets(st.floats(-30, 30, allow_nan=False, allow_subnormal=False), min_size=n, max_size=n)))
    pts = []
    for a in alphas:
        cl = draw(st.floats(-3, 3, allow_nan=False))
        cd = draw(st.floats(1e-4, 2.5, allow_nan=False))
        cm = draw(st.floats(-1, 1, allow_nan=False))
        pts.append(PolarPoint(a, cl, cd, cm))
    re = draw(st.floats(1e3, 1e8, allow_nan=False))
    return PolarCurve(re, tuple(pts))


@given(curves())
def test_polar_round_trip(curve):
    assert parse_polar_file(format_polar(curve)) == curve


@settings(max_examples=300)
@given(st.floats(1e4, 1e7), st.floats(-math.pi + 1e-6, math.pi - 1e-6))
def test_lookup_continuous(polars, re, a):
    for surf in (polars.cruise, polars.hover):
        lo = np.array(lookup_coeffs(surf, re, a - 1e-7))
        hi = np.array(lookup_coeffs(surf, re, a + 1e-7))
        assert np.all(np.abs(hi - lo) < 1e-4)
        assert np.all(np.isfinite(lo))


@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi <= w <= math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9) and math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)


@given(angle, st.floats(-1.5, 1.5), angle)
def test_euler_round_trip(phi, theta, psi):
    got = euler_from_matrix(quat_to_matrix(quat_from_euler(phi, theta, psi)))
    for g, w in zip(got, (phi, theta, psi)):
        assert abs(wrap_angle(g - w)) < 1e-9


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4).filter(lambda q: np.linalg.norm(q) > 0.1))
def test_quaternion_matrix_round_trip(q):
    q = np.array(q) / np.linalg.norm(q)
    m = quat_to_matrix(q)
    np.testing.assert_allclose(m.T @ m, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(quat_to_matrix(matrix_to_quat(m)), m, atol=1e-14)


@settings(max_examples=100, deadline=None)
@given(vec3, vec3, angle, st.floats(-1.5, 1.5), angle, joint, joint, st.floats(0, 3), st.floats(0, 3))
def test_loads_mirror(airframe, polars, env, v, w, phi, theta, psi, ep, es, tp, ts):
    s = RigidBodyState([0, 0, 10], quat_from_euler(phi, theta, psi), np.array(v) * 0.05, np.array(w) * 0.05)
    act = ActuationInput(ep, es, {"port": tp, "starboard": ts})
    a = total_aero_loads(s, airframe, act, polars, env)
    b = total_aero_loads(mirror_state(s), airframe, mirror_actuation(act), polars, env)
    flip_f, flip_m = np.array([1, -1, 1]), np.array([-1, 1, -1])
    scale = 1.0 + np.abs(a.force).max() + np.abs(a.moment).max()
    assert np.abs(b.force - a.force * flip_f).max() <= 1e-12 * scale
    assert np.abs(b.moment - a.moment * flip_m).max() <= 1e-12 * scale
    ta, tb = thrust_total(act, airframe), thrust_total(mirror_actuation(act), airframe)
    np.testing.assert_allclose(tb.force, ta.force * flip_f, atol=1e-15)
    np.testing.assert_allclose(tb.moment, ta.moment * flip_m, atol=1e-15)


@given(st.one_of(st.just(0.0), st.floats(1e-9, 3)), joint)
def test_thrust_magnitude(airframe, t, e):
    for spec in airframe.thrusters:
        f = thrust_load(spec, t, ActuationInput(e, e)).force
        assert math.isclose(np.linalg.norm(f), t, rel_tol=1e-14)
