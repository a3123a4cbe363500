import math

import numpy as np
import pytest

from metamorph.aero import (
    ActuationInput,
    SegmentAeroState,
    effective_alpha,
    evaluate_wing,
    kinematic_alpha,
    segment_aero_state,
    segment_loads,
    segment_velocity,
    sum_wing,
    total_aero_loads,
)
from metamorph.airframe import MassProperties, SegmentGeometry, WingSpec, build_airframe
from metamorph.dynamics import RigidBodyState
from metamorph.environment import Environment
from metamorph.frames import LoadSet, Side, quat_from_euler, wind_to_body
from metamorph.scenario import trim_glide


def make_segment(r_ac=(0.0, 0.35, 0.0), side=Side.STARBOARD, chord=0.1, area=0.007):
    return SegmentGeometry(side, 1, area / chord, chord, area, np.array(r_ac, dtype=float), np.eye(3))


def aero_state(alpha_kin, c_l, c_d, c_m=0.0, q=61.25):
    return SegmentAeroState(np.zeros(3), 10.0, alpha_kin, alpha_kin, 1e5, q, (c_l, c_d, c_m))


def test_velocity_without_rotation():
    s = RigidBodyState(v=[3.0, -1.0, 2.0])
    for r in ([0, 0.3, 0], [0.1, -0.2, 0.05]):
        np.testing.assert_array_equal(segment_velocity(s, make_segment(r)), s.v)


def test_velocity_from_yaw_rate():
    s = RigidBodyState(w=[0.0, 0.0, 1.0])
    np.testing.assert_allclose(segment_velocity(s, make_segment()), [-0.35, 0.0, 0.0], atol=1e-15)


def test_spin_about_x_gives_antisymmetric_plunge():
    s = RigidBodyState(w=[40.0, 0.0, 0.0])
    vp = segment_velocity(s, make_segment((0, -0.3, 0), Side.PORT))
    vs = segment_velocity(s, make_segment((0, 0.3, 0), Side.STARBOARD))
    assert vp[2] == -vs[2] and vp[2] != 0.0


def test_wind_subtracted_in_body_frame():
    # heading pi/2 points the nose along world -y; wind toward +y is a headwind
    s = RigidBodyState(q_att=quat_from_euler(0.0, 0.0, math.pi / 2))
    v = segment_velocity(s, make_segment(), wind=[0.0, 5.0, 0.0])
    np.testing.assert_allclose(v, [5.0, 0.0, 0.0], atol=1e-12)


@pytest.mark.parametrize(
    "v, want", [((10, 0, 0), 0.0), ((10, 0, 10), math.pi / 4), ((0, 5, 0), 0.0), ((0, 0, 0), 0.0), ((-1, 0, 0), math.pi)]
)
def test_kinematic_alpha(v, want):
    assert kinematic_alpha(np.array(v, dtype=float)) == pytest.approx(want, abs=1e-15)


def test_effective_alpha_signs():
    zero = ActuationInput()
    assert effective_alpha(0.0, Side.PORT, zero) == 0.0 == effective_alpha(0.0, Side.STARBOARD, zero)
    act = ActuationInput(0.0175, 0.0175)
    assert effective_alpha(0.05, Side.PORT, act) == pytest.approx(0.0325, abs=1e-15)
    assert effective_alpha(0.05, Side.STARBOARD, act) == pytest.approx(0.0675, abs=1e-15)


def test_effective_alpha_wrapped():
    act = ActuationInput(1.5, 1.5)
    assert effective_alpha(3.0, Side.STARBOARD, act) == pytest.approx(4.5 - 2 * math.pi, abs=1e-15)


def test_actuation_guards():
    with pytest.raises(ValueError):
        ActuationInput(2.0, 0.0)
    with pytest.raises(ValueError):
        ActuationInput(0.0, 0.0, {"port": -1.0})
    with pytest.raises(ValueError):
        ActuationInput(0.0, 0.0, {"port": math.inf})


def test_segment_force_hand_example():
    q = 0.5 * 1.225 * 10.0**2
    loads = segment_loads(make_segment(), aero_state(0.0, 0.4, 0.01, q=q))
    np.testing.assert_allclose(loads.force, [-0.01 * q * 0.007, 0.0, -0.4 * q * 0.007], rtol=1e-14)
    np.testing.assert_allclose(loads.force, [-0.0042875, 0.0, -0.1715], rtol=1e-12)


def test_segment_force_at_ninety_degrees():
    loads = segment_loads(make_segment(), aero_state(math.pi / 2, 0.4, 0.01, q=1.0 / 0.007))
    np.testing.assert_allclose(loads.force, [0.4, 0.0, -0.01], atol=1e-15)


def test_arm_moment_unit_cross():
    loads = segment_loads(make_segment((0.0, 1.0, 0.0)), aero_state(0.0, 1.0, 0.0, q=1.0 / 0.007))
    np.testing.assert_allclose(loads.force, [0.0, 0.0, -1.0], atol=1e-15)
    np.testing.assert_allclose(loads.moment, [-1.0, 0.0, 0.0], atol=1e-15)


def test_pitching_moment_term():
    seg = make_segment((0.0, 0.0, 0.0))
    loads = segment_loads(seg, aero_state(0.3, 0.0, 0.0, c_m=-0.1, q=2.0))
    np.testing.assert_allclose(loads.moment, [0.0, -0.1 * 2.0 * seg.area * seg.chord, 0.0], atol=1e-18)


def test_rotation_matrix_orthonormal():
    rng = np.random.default_rng(0)
    for a in rng.uniform(-math.pi, math.pi, 10_000):
        r = wind_to_body(a)
        assert np.abs(r.T @ r - np.eye(3)).max() < 1e-14


def test_force_norm_equals_lift_drag_norm():
    rng = np.random.default_rng(1)
    seg = make_segment()
    for _ in range(200):
        a, cl, cd, q = rng.uniform(-math.pi, math.pi), rng.normal(), rng.uniform(0.01, 2), rng.uniform(0, 100)
        f = segment_loads(seg, aero_state(a, cl, cd, q=q)).force
        qa = q * seg.area
        assert np.linalg.norm(f) == pytest.approx(math.hypot(cl * qa, cd * qa), rel=1e-14)


def test_aero_state_invariants(airframe, polars, env):
    rng = np.random.default_rng(2)
    for _ in range(50):
        s = RigidBodyState(v=rng.normal(size=3) * 8, w=rng.normal(size=3) * 5)
        act = ActuationInput(*rng.uniform(-1.5, 1.5, 2))
        for seg in airframe.segments[::3]:
            st = segment_aero_state(s, seg, act, polars, env)
            assert st.V_air == pytest.approx(np.linalg.norm(st.v_local), rel=1e-15)
            assert st.q_dyn == 0.5 * env.rho * st.V_air * st.V_air
            assert st.reynolds == env.rho * st.V_air * seg.chord / env.mu


def test_mirrored_segments_cancel(symmetric_polars, env):
    af = build_airframe()
    s = RigidBodyState(v=[12.0, 0.0, 0.8])
    port, stbd = evaluate_wing(s, af, ActuationInput(), symmetric_polars, env)
    np.testing.assert_array_equal(port.force[:, 0], stbd.force[:, 0])
    total = sum_wing(port, stbd)
    assert abs(total.moment[0]) < 1e-12
    assert abs(total.moment[2]) < 1e-12


def test_zero_airspeed_zero_loads(airframe, polars, env):
    loads = total_aero_loads(RigidBodyState(), airframe, ActuationInput(0.3, -0.2), polars, env)
    assert np.all(loads.force == 0.0) and np.all(loads.moment == 0.0)


def test_trimmed_glide_symmetric_loads(airframe, polars, env):
    state, act = trim_glide(airframe, polars, env)
    loads = total_aero_loads(state, airframe, act, polars, env)
    assert abs(loads.force[1]) < 1e-10
    assert abs(loads.moment[0]) < 1e-10 and abs(loads.moment[2]) < 1e-10


def test_opposite_steps_roll_toward_port(airframe, polars, env):
    state, act = trim_glide(airframe, polars, env)
    d = math.radians(1.0)
    base = total_aero_loads(state, airframe, act, polars, env)
    stepped = total_aero_loads(state, airframe, ActuationInput(d, d), polars, env)
    # port (-y) loses lift: negative roll moment in x-forward, z-down axes
    assert stepped.moment[0] - base.moment[0] < -0.05


def test_antisymmetric_actuation_pure_roll(symmetric_polars, env):
    af = build_airframe()
    s = RigidBodyState(v=[12.0, 0.0, 0.0])
    base = total_aero_loads(s, af, ActuationInput(), symmetric_polars, env)
    for d in np.radians([0.5, 1.0, 3.0, 8.0]):
        dm = total_aero_loads(s, af, ActuationInput(d, d), symmetric_polars, env).moment - base.moment
        assert abs(dm[0]) > 0
        assert abs(dm[1]) < 1e-9 * abs(dm[0]) and abs(dm[2]) < 1e-9 * abs(dm[0])


def test_segment_count_convergence(cfg, polars, env):
    state, act = trim_glide(cfg.airframe(8), polars, env)
    f8 = total_aero_loads(state, cfg.airframe(8), act, polars, env)
    f16 = total_aero_loads(state, cfg.airframe(16), act, polars, env)
    for a, b in zip(np.concatenate((f8.force, f8.moment)), np.concatenate((f16.force, f16.moment))):
        if abs(a) > 1e-6:
            assert abs(b - a) <= 0.02 * abs(a)


def test_blend_between_airfoils(polars):
    assert polars.hover_weight(0.0) == 0.0
    assert polars.hover_weight(math.radians(25)) == 0.0
    assert polars.hover_weight(math.radians(75)) == 1.0
    assert polars.hover_weight(-math.radians(37.5)) == pytest.approx(0.5)
    mid = polars.coeffs(1e5, 0.1, math.radians(37.5))
    c, h = polars.coeffs(1e5, 0.1, 0.0), polars.coeffs(1e5, 0.1, 1.3)
    np.testing.assert_allclose(mid, 0.5 * (np.array(c) + np.array(h)), atol=1e-15)


GEOMETRIES = [
    dict(),
    dict(dihedral=0.15, sweep=0.2, twist=-0.05, hinge_offset=0.01, segments_per_side=5),
]


@pytest.mark.parametrize("kw", GEOMETRIES)
def test_vector_route_matches_per_segment_route(kw, polars):
    af = build_airframe(WingSpec(**kw), MassProperties(0.45, cg_offset=[0.005, 0.0, 0.002]))
    env = Environment(wind=[1.0, -0.5, 0.3])
    rng = np.random.default_rng(4)
    for _ in range(25):
        s = RigidBodyState(
            q_att=quat_from_euler(*rng.uniform(-1, 1, 3)), v=rng.normal(size=3) * 10, w=rng.normal(size=3) * 10
        )
        act = ActuationInput(*rng.uniform(-1.5, 1.5, 2))
        port, stbd = evaluate_wing(s, af, act, polars, env)
        total = LoadSet.zero()
        for seg in af.segments:
            eps = act.epsilon(seg.side)
            st = segment_aero_state(s, seg, act, polars, env)
            ld = segment_loads(seg, st, eps)
            side = port if seg.side is Side.PORT else stbd
            k = seg.index - 1
            assert side.alpha_eff[k] == pytest.approx(st.alpha_eff, abs=1e-12)
            np.testing.assert_allclose(side.force[k], ld.force, rtol=1e-10, atol=1e-13)
            np.testing.assert_allclose(side.moment[k], ld.moment, rtol=1e-10, atol=1e-13)
            total = total + ld
        agg = sum_wing(port, stbd)
        np.testing.assert_allclose(agg.force, total.force, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(agg.moment, total.moment, rtol=1e-10, atol=1e-12)
