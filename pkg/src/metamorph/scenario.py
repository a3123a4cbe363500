"""Open-loop scenarios: actuation schedules, the simulation loop, built-ins and trim."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .aero import ActuationInput, AirfoilPolars, NonFiniteCoefficient, evaluate_wing, sum_wing
from .airframe import Airframe
from .dynamics import RigidBodyState, SimulationDiverged, ground_contact, gravity_body, step
from .environment import Environment
from .frames import LoadSet, Side, quat_from_axis_angle, quat_from_euler
from .propulsion import thrust_load

HOVER_JOINT = math.radians(75.0)
SPINUP_THRUST = 0.3
# Four-phase hover profile (take-off, hover, descend, re-hover) [N per thruster].
# hover level derived by scripts/derive_hover_thrust.py for the default airframe
# and synthetic polars: the thrust at which the steady spin carries the weight.
HOVER_THRUST_LEVELS = (0.30, 0.175, 0.15, 0.175)
HOVER_PHASE_DURATION = 4.0
CRUISE_BASE_THRUST = 0.05
CRUISE_ALTITUDE = 100.0

VEHICLE_COLUMNS = (
    "t", "px", "py", "pz", "phi", "theta", "psi", "vx", "vy", "vz",
    "wx", "wy", "wz", "Fx", "Fy", "Fz", "Mx", "My", "Mz",
)  # fmt: skip
SEGMENT_COLUMNS = (
    "t", "side", "index", "alpha_kin", "alpha_eff", "reynolds", "Fx", "Fy", "Fz", "Mx", "My", "Mz",
)  # fmt: skip


class TrimNotConverged(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"trim did not converge after {iterations} iterations (residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class Schedule:
    """Piecewise-constant actuation; an entry holds from its start time until the next."""

    entries: tuple[tuple[float, ActuationInput], ...]

    def __post_init__(self):
        entries = tuple((float(t), a) for t, a in self.entries)
        if not entries or entries[0][0] != 0.0:
            raise ValueError("schedule must start with an entry at t = 0")
        times = [t for t, _ in entries]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("schedule start times must be strictly increasing")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_times", times)

    def index(self, t: float) -> int:
        return max(bisect.bisect_right(self._times, t) - 1, 0)

    def at(self, t: float) -> ActuationInput:
        return self.entries[self.index(t)][1]

    @classmethod
    def constant(cls, act: ActuationInput) -> "Schedule":
        return cls(((0.0, act),))


@dataclass(frozen=True)
class Scenario:
    name: str
    initial_state: RigidBodyState
    schedule: Schedule
    duration: float
    ground_contact_enabled: bool = True
    airfoil_mode_override: str | None = None
    events: dict = field(default_factory=dict, compare=False)  # named times used by analysis
    inertia_epsilon: float | None = None  # joint angle for the default inertia; None keeps the airframe's

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("scenario duration must be positive")
        if abs(np.linalg.norm(self.initial_state.q_att) - 1.0) > 1e-9:
            raise ValueError("initial attitude quaternion must be normalized")
        if self.airfoil_mode_override not in (None, "cruise", "hover"):
            raise ValueError("airfoil_mode_override must be None, 'cruise' or 'hover'")


@dataclass
class Telemetry:
    """Decimated vehicle and per-segment histories."""

    scenario: str
    vehicle: np.ndarray  # (n_out, len(VEHICLE_COLUMNS))
    segment_side: list  # side label per segment column
    segment_index: list
    segments: np.ndarray  # (n_out, n_seg, 9): alpha_kin, alpha_eff, Re, F(3), M(3)

    def column(self, name: str) -> np.ndarray:
        return self.vehicle[:, VEHICLE_COLUMNS.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def segment_series(self, side: str, index: int, quantity: str) -> np.ndarray:
        k = next(i for i, (s, n) in enumerate(zip(self.segment_side, self.segment_index)) if s == side and n == index)
        return self.segments[:, k, SEGMENT_COLUMNS.index(quantity) - 3]

    def vehicle_csv(self) -> str:
        lines = [",".join(VEHICLE_COLUMNS)]
        for row in self.vehicle:
            lines.append(",".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"

    def segments_csv(self) -> str:
        lines = [",".join(SEGMENT_COLUMNS)]
        for t, block in zip(self.column("t"), self.segments):
            for side, idx, vals in zip(self.segment_side, self.segment_index, block):
                lines.append(",".join([repr(float(t)), side, str(idx)] + [repr(float(x)) for x in vals]))
        return "\n".join(lines) + "\n"


def thrust_total(act, airframe: Airframe) -> LoadSet:
    total = LoadSet.zero()
    for spec in airframe.thrusters:
        total = total + thrust_load(spec, act.thrust(spec.id), act)
    return total


def vehicle_loads(state, act, airframe: Airframe, polars, env, contact: bool = True, mode=None, thrust=None):
    """Total body-frame loads plus the per-segment breakdown ``(total, (port, starboard))``.

    ``thrust`` may carry a precomputed :func:`thrust_total` for ``act``; it
    depends only on the commands, not on the state.
    """
    wings = evaluate_wing(state, airframe, act, polars, env, mode)
    aero = sum_wing(*wings)
    grav = gravity_body(state, airframe.mass.m_uav, env.g)
    if thrust is None:
        thrust = thrust_total(act, airframe)
    force = grav.force + aero.force + thrust.force
    moment = aero.moment + thrust.moment
    if contact:
        ground = ground_contact(state, airframe.mass.m_uav, env)
        force = force + ground.force
        moment = moment + ground.moment
    return LoadSet(force, moment), wings


def run(
    scenario: Scenario,
    airframe: Airframe,
    polars: AirfoilPolars,
    env: Environment | None = None,
    dt: float = 1e-3,
    output_every: int = 10,
) -> Telemetry:
    """Integrate ``scenario`` and return decimated telemetry (final step always kept)."""
    env = env or Environment()
    n_steps = int(round(scenario.duration / dt))
    mass = airframe.mass.m_uav
    inertia, inv = airframe.inertia_at(scenario.inertia_epsilon)
    contact, mode, schedule = scenario.ground_contact_enabled, scenario.airfoil_mode_override, scenario.schedule

    thrust_cache = {i: thrust_total(a, airframe) for i, (_, a) in enumerate(schedule.entries)}

    def loads_at(s):
        i = schedule.index(s.t)
        try:
            return vehicle_loads(s, schedule.entries[i][1], airframe, polars, env, contact, mode, thrust_cache[i])
        except NonFiniteCoefficient as exc:
            # finite tables, non-finite product: the state has run away
            raise SimulationDiverged(f"non-finite loads at t={s.t:.6f}: {exc}", s) from None

    def loads_fn(s):
        return loads_at(s)[0]

    port, stbd = [s for s in airframe.port], [s for s in airframe.starboard]
    labels = [s.side.value for s in port + stbd]
    indices = [s.index for s in port + stbd]
    vehicle_rows, seg_rows = [], []

    def record(s):
        total, (wp, ws) = loads_at(s)
        phi, theta, psi = s.euler
        vehicle_rows.append(np.concatenate(([s.t], s.p, [phi, theta, psi], s.v, s.w, total.force, total.moment)))
        block = []
        for wing in (wp, ws):
            block.append(
                np.column_stack((wing.alpha_kin, wing.alpha_eff, wing.reynolds, wing.force, wing.moment))
            )
        seg_rows.append(np.vstack(block))

    state = replace(scenario.initial_state, t=0.0)
    try:
        record(state)
        for n in range(1, n_steps + 1):
            state = step(state, loads_fn, dt, mass, inertia, inv)
            state = replace(state, t=n * dt)
            if n % output_every == 0 or n == n_steps:
                record(state)
    except SimulationDiverged as exc:
        exc.telemetry = Telemetry(scenario.name, np.array(vehicle_rows), labels, indices, np.array(seg_rows)) if vehicle_rows else None
        raise
    return Telemetry(scenario.name, np.array(vehicle_rows), labels, indices, np.array(seg_rows))


# ---------------------------------------------------------------------------
# mirroring


_FLIP = np.array([1.0, -1.0, 1.0])


def mirror_state(s: RigidBodyState) -> RigidBodyState:
    """Reflect through the world x-z plane (body x-z plane likewise)."""
    q = s.q_att
    return RigidBodyState(s.p * _FLIP, np.array([q[0], -q[1], q[2], -q[3]]), s.v * _FLIP, -s.w * _FLIP, s.t)


def mirror_actuation(act: ActuationInput, thruster_pairs=(("port", "starboard"),)) -> ActuationInput:
    swap = {}
    for a, b in thruster_pairs:
        swap[a], swap[b] = b, a
    thrusts = {swap.get(k, k): v for k, v in act.thrusts.items()}
    return ActuationInput(-act.epsilon_s, -act.epsilon_p, thrusts, act.eps_limit)


def mirror_scenario(sc: Scenario) -> Scenario:
    """Mirror image: port and starboard commands swapped, state reflected.

    Positive commands rotate the two wings in opposite senses, so the mirror
    of ``(eps_P, eps_S)`` is ``(-eps_S, -eps_P)``.
    """
    sched = Schedule(tuple((t, mirror_actuation(a)) for t, a in sc.schedule.entries))
    eps = None if sc.inertia_epsilon is None else -sc.inertia_epsilon
    return replace(
        sc,
        name=sc.name + "_mirror",
        initial_state=mirror_state(sc.initial_state),
        schedule=sched,
        inertia_epsilon=eps,
    )


# ---------------------------------------------------------------------------
# trim


def _glide_state(V: float, alpha: float, theta: float, altitude: float) -> RigidBodyState:
    return RigidBodyState(
        p=[0.0, 0.0, altitude],
        q_att=quat_from_euler(0.0, theta, 0.0),
        v=[V * math.cos(alpha), 0.0, V * math.sin(alpha)],
    )


def trim_residual(x, airframe, polars, env, act, altitude=CRUISE_ALTITUDE) -> np.ndarray:
    """(F_x, F_z, M_y) of the whole vehicle at airspeed, alpha, pitch ``x``."""
    V, alpha, theta = x
    total, _ = vehicle_loads(_glide_state(V, alpha, theta, altitude), act, airframe, polars, env, contact=False)
    return np.array([total.force[0], total.force[2], total.moment[1]])


def trim_glide(
    airframe: Airframe,
    polars: AirfoilPolars,
    env: Environment | None = None,
    guess=None,
    thrust: float = 0.0,
    altitude: float = CRUISE_ALTITUDE,
    tol: float = 1e-8,
    max_iter: int = 200,
):
    """Steady symmetric glide with wings at zero rotation.

    Solves airspeed, angle of attack and pitch so that the longitudinal force
    and pitching moment residual vanishes (lateral terms vanish by symmetry),
    using damped Newton iteration on a finite-difference Jacobian.
    ``thrust`` is applied equally to every thruster. Returns the trimmed state
    and the matching actuation input.
    """
    env = env or Environment()
    act = ActuationInput(0.0, 0.0, {t.id: thrust for t in airframe.thrusters})
    if guess is None:
        area = sum(s.area for s in airframe.segments)
        V0 = math.sqrt(2.0 * airframe.mass.m_uav * env.g / (env.rho * area * 0.4))
        guess = (V0, math.radians(2.0), math.radians(-1.0))
    x = np.array(guess, dtype=float)

    def res(z):
        return trim_residual(z, airframe, polars, env, act, altitude)

    r = res(x)
    norm = np.linalg.norm(r)
    for it in range(1, max_iter + 1):
        if norm < tol:
            break
        h = np.array([1e-6 * max(1.0, abs(x[0])), 1e-7, 1e-7])
        jac = np.empty((3, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = h[j]
            jac[:, j] = (res(x + e) - res(x - e)) / (2.0 * h[j])
        try:
            dx = -np.linalg.solve(jac, r)
        except np.linalg.LinAlgError:
            dx = -np.linalg.lstsq(jac, r, rcond=None)[0]
        lam = 1.0
        while lam > 1e-6:
            xn = x + lam * dx
            if xn[0] > 0:
                rn = res(xn)
                if np.linalg.norm(rn) < norm:
                    break
            lam *= 0.5
        else:
            raise TrimNotConverged(it, norm)
        x, r, norm = xn, rn, np.linalg.norm(rn)
    if norm >= tol:
        raise TrimNotConverged(max_iter, norm)
    V, alpha, theta = x
    return _glide_state(V, alpha, theta, altitude), act


# ---------------------------------------------------------------------------
# built-in experiments


def hover_rest_height(mass: float, env: Environment) -> float:
    """CoM height at static equilibrium on the contact spring."""
    return env.contact_height - mass * env.g / env.contact_stiffness


def hover_initial_state(mass: float, env: Environment, height: float | None = None) -> RigidBodyState:
    """Nose (body x) pointing straight up, at rest on the ground unless ``height`` is given."""
    z = hover_rest_height(mass, env) if height is None else height
    return RigidBodyState(p=[0.0, 0.0, z], q_att=quat_from_axis_angle([0.0, 1.0, 0.0], -math.pi / 2))


def hover_actuation(thrust: float, joint: float = HOVER_JOINT) -> ActuationInput:
    return ActuationInput(joint, joint, {"port": thrust, "starboard": thrust})


def _bisect(fn, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    f_lo = fn(lo)
    if f_lo * fn(hi) > 0:
        raise ValueError(f"root not bracketed in [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def _hover_loads(airframe, polars, env, thrust, spin, joint, climb):
    state = RigidBodyState(
        p=[0.0, 0.0, 10.0], q_att=quat_from_axis_angle([0.0, 1.0, 0.0], -math.pi / 2), v=[climb, 0.0, 0.0], w=[spin, 0.0, 0.0]
    )
    return vehicle_loads(state, hover_actuation(thrust, joint), airframe, polars, env, contact=False)[0]


def hover_spin_rate(airframe, polars, env=None, thrust=SPINUP_THRUST, joint=HOVER_JOINT, climb=0.0, max_rate=500.0) -> float:
    """Quasi-steady body-x spin rate at which aerodynamic drag balances the thrust couple.

    Airborne, nose straight up, climbing at ``climb`` m/s. The spin is negative
    about body x for positive joint commands.
    """
    env = env or Environment()
    return _bisect(lambda w: _hover_loads(airframe, polars, env, thrust, w, joint, climb).moment[0], -max_rate, -1e-6)


def hover_lift_margin(airframe, polars, env=None, thrust=SPINUP_THRUST, joint=HOVER_JOINT, climb=0.0) -> float:
    """Net upward force [N] (weight included) at the quasi-steady spin rate."""
    env = env or Environment()
    spin = hover_spin_rate(airframe, polars, env, thrust, joint, climb)
    return _hover_loads(airframe, polars, env, thrust, spin, joint, climb).force[0]


def hover_thrust(airframe, polars, env=None, joint=HOVER_JOINT, lo=0.01, hi=None) -> float:
    """Thrust per thruster that holds the spinning vehicle at constant altitude."""
    env = env or Environment()
    hi = hi or min(t.max_thrust for t in airframe.thrusters)
    return _bisect(lambda T: hover_lift_margin(airframe, polars, env, T, joint), lo, hi, tol=1e-10)


def hover_spinup(
    mass: float = 0.45, env: Environment | None = None, duration: float = 10.0, thrust=SPINUP_THRUST, joint=HOVER_JOINT
) -> Scenario:
    """On the ground, nose up, constant equal thrusts with both joints at ``joint``."""
    env = env or Environment()
    return Scenario(
        "hover_spinup",
        hover_initial_state(mass, env),
        Schedule.constant(hover_actuation(thrust, joint)),
        duration,
        inertia_epsilon=joint,
    )


def hover_thrust_profile(
    levels=HOVER_THRUST_LEVELS,
    phase_duration: float = HOVER_PHASE_DURATION,
    mass: float = 0.45,
    env: Environment | None = None,
    initial_height: float | None = None,
    joint: float = HOVER_JOINT,
) -> Scenario:
    """Joints fixed at 75 deg; thrust steps through take-off, hover, descend, re-hover."""
    env = env or Environment()
    entries = tuple((i * phase_duration, hover_actuation(T, joint)) for i, T in enumerate(levels))
    return Scenario(
        "hover_thrust",
        hover_initial_state(mass, env, initial_height),
        Schedule(entries),
        phase_duration * len(levels),
        events={"phases": [(i * phase_duration, (i + 1) * phase_duration, T) for i, T in enumerate(levels)]},
        inertia_epsilon=joint,
    )


def cruise_roll(
    airframe, polars, env=None, t_step=1.0, step_length=0.5, delta=math.radians(1.0), settle=5.5, altitude=CRUISE_ALTITUDE
):
    """Trimmed glide, then opposite 1 deg joint steps (port nose-down, starboard nose-up)."""
    state, trim_act = trim_glide(airframe, polars, env, altitude=altitude)
    step_act = replace(trim_act, epsilon_p=delta, epsilon_s=delta)
    t_back = t_step + step_length
    return Scenario(
        "cruise_roll",
        state,
        Schedule(((0.0, trim_act), (t_step, step_act), (t_back, trim_act))),
        t_back + settle,
        ground_contact_enabled=False,
        events={"step": t_step, "return": t_back},
    )


def cruise_yaw(
    airframe,
    polars,
    env=None,
    base_thrust=CRUISE_BASE_THRUST,
    t_step=1.0,
    step_length=0.5,
    settle=5.5,
    altitude=CRUISE_ALTITUDE,
):
    """Powered trimmed glide, then port thrust +20 % and starboard thrust -20 %."""
    state, trim_act = trim_glide(airframe, polars, env, thrust=base_thrust, altitude=altitude)
    ids = {t.side: t.id for t in airframe.thrusters}
    diff = replace(trim_act, thrusts={ids[Side.PORT]: 1.2 * base_thrust, ids[Side.STARBOARD]: 0.8 * base_thrust})
    t_back = t_step + step_length
    return Scenario(
        "cruise_yaw",
        state,
        Schedule(((0.0, trim_act), (t_step, diff), (t_back, trim_act))),
        t_back + settle,
        ground_contact_enabled=False,
        events={"step": t_step, "return": t_back},
    )


BUILTINS = ("hover_spinup", "hover_thrust", "cruise_roll", "cruise_yaw")


def builtin_scenario(name: str, airframe: Airframe, polars: AirfoilPolars, env: Environment | None = None, hover_levels=None) -> Scenario:
    env = env or Environment()
    m = airframe.mass.m_uav
    if name == "hover_spinup":
        return hover_spinup(m, env)
    if name == "hover_thrust":
        return hover_thrust_profile(hover_levels or HOVER_THRUST_LEVELS, mass=m, env=env)
    if name == "cruise_roll":
        return cruise_roll(airframe, polars, env)
    if name == "cruise_yaw":
        return cruise_yaw(airframe, polars, env)
    raise KeyError(f"unknown built-in scenario {name!r}; choose from {', '.join(BUILTINS)}")
