"""Strip-theory aerodynamics of the segmented wing.

Each spanwise segment is treated as an independent 2D section: its local
air-relative velocity gives a kinematic angle of attack, the commanded wing
rotation shifts that to the effective angle used for the polar lookup, and
the resulting lift and drag are rotated back into the body frame through the
kinematic angle. Spanwise flow is dropped before anything else is computed.

Two routes are provided. The per-segment functions (``segment_velocity``,
``kinematic_alpha``, ``effective_alpha``, ``segment_aero_state``,
``segment_loads``) work on one segment at a time and are meant for
inspection and testing; ``evaluate_wing`` does the same arithmetic for all
segments at once and is what the integrator calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .environment import Environment
from .frames import LoadSet, Side, cross, quat_to_matrix, rot_y, wrap_angle
from .polar_db import PolarError, PolarSurface, lookup_coeffs

V_EPS = 1e-6
EPS_LIMIT = math.pi / 2


class NonFiniteCoefficient(PolarError):
    pass


@dataclass(frozen=True)
class ActuationInput:
    """Wing rotation commands [rad] and thrust commands [N] at one instant."""

    epsilon_p: float = 0.0
    epsilon_s: float = 0.0
    thrusts: Mapping[str, float] = field(default_factory=dict)
    eps_limit: float = field(default=EPS_LIMIT, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "thrusts", dict(self.thrusts))
        for name, eps in (("epsilon_p", self.epsilon_p), ("epsilon_s", self.epsilon_s)):
            if not math.isfinite(eps) or abs(eps) > self.eps_limit:
                raise ValueError(f"{name}={eps} outside the mechanical range +-{self.eps_limit}")
        for k, t in self.thrusts.items():
            if not math.isfinite(t) or t < 0:
                raise ValueError(f"thrust {k!r}={t} must be finite and non-negative")

    def epsilon(self, side: Side) -> float:
        return self.epsilon_p if side is Side.PORT else self.epsilon_s

    def thrust(self, thruster_id: str) -> float:
        return self.thrusts.get(thruster_id, 0.0)


@dataclass(frozen=True)
class AirfoilPolars:
    """Cruise and hover surfaces plus the schedule that blends them by |eps|."""

    cruise: PolarSurface
    hover: PolarSurface
    cruise_limit: float = math.radians(25.0)
    hover_limit: float = math.radians(50.0)

    def hover_weight(self, epsilon: float) -> float:
        e = abs(epsilon)
        if e <= self.cruise_limit:
            return 0.0
        if e >= self.hover_limit:
            return 1.0
        return (e - self.cruise_limit) / (self.hover_limit - self.cruise_limit)

    def coeffs(self, reynolds, alpha, epsilon: float, mode: str | None = None):
        w = self.hover_weight(epsilon) if mode is None else {"cruise": 0.0, "hover": 1.0}[mode]
        if w == 0.0:
            return lookup_coeffs(self.cruise, reynolds, alpha)
        if w == 1.0:
            return lookup_coeffs(self.hover, reynolds, alpha)
        c = lookup_coeffs(self.cruise, reynolds, alpha)
        h = lookup_coeffs(self.hover, reynolds, alpha)
        return tuple((1.0 - w) * a + w * b for a, b in zip(c, h))


@dataclass(frozen=True)
class SegmentAeroState:
    v_local: np.ndarray  # in-plane air-relative velocity, segment frame [m/s]
    V_air: float
    alpha_kin: float
    alpha_eff: float
    reynolds: float
    q_dyn: float
    coeffs: tuple[float, float, float]


def segment_position(seg, epsilon: float = 0.0) -> np.ndarray:
    """Aerodynamic centre after the hinge rotation ``epsilon``."""
    if epsilon == 0.0 or seg.hinge_offset == 0.0:
        return seg.r_ac
    h = seg.hinge_point
    rot = seg.frame @ rot_y(seg.side.hinge_sign * epsilon) @ seg.frame.T
    return h + rot @ (seg.r_ac - h)


def segment_velocity(state, seg, wind=None, epsilon: float = 0.0) -> np.ndarray:
    """Body-frame velocity of the segment's aerodynamic centre relative to the air."""
    v = state.v + cross(state.w, segment_position(seg, epsilon))
    if wind is not None:
        v = v - quat_to_matrix(state.q_att).T @ np.asarray(wind, dtype=float)
    return v


def kinematic_alpha(v_local) -> float:
    vx, vz = float(v_local[0]), float(v_local[2])
    if math.hypot(vx, vz) <= V_EPS:
        return 0.0
    return math.atan2(vz, vx)


def effective_alpha(alpha_kin: float, side: Side, act: ActuationInput) -> float:
    """Port: alpha_kin - eps_P; starboard: alpha_kin + eps_S; wrapped to [-pi, pi]."""
    return wrap_angle(alpha_kin + side.hinge_sign * act.epsilon(side))


def segment_aero_state(state, seg, act: ActuationInput, polars: AirfoilPolars, env: Environment, mode=None):
    eps = act.epsilon(seg.side)
    v_body = segment_velocity(state, seg, env.wind, eps)
    v_seg = seg.frame.T @ v_body
    v_plane = np.array([v_seg[0], 0.0, v_seg[2]])
    V = math.hypot(v_plane[0], v_plane[2])
    a_kin = kinematic_alpha(v_plane)
    a_eff = wrap_angle(effective_alpha(a_kin, seg.side, act) + seg.twist)
    re = env.rho * V * seg.chord / env.mu
    coeffs = polars.coeffs(max(re, 1.0), a_eff, eps, mode)
    return SegmentAeroState(v_plane, V, a_kin, a_eff, re, 0.5 * env.rho * V * V, tuple(coeffs))


def segment_loads(seg, aero: SegmentAeroState, epsilon: float = 0.0) -> LoadSet:
    c_l, c_d, c_m = aero.coeffs
    if not all(math.isfinite(c) for c in aero.coeffs):
        raise NonFiniteCoefficient(f"non-finite coefficients {aero.coeffs} on segment {seg.side.value}{seg.index}")
    qa = aero.q_dyn * seg.area
    lift, drag = c_l * qa, c_d * qa
    f_aero = np.array([-drag, 0.0, -lift])
    ca, sa = math.cos(aero.alpha_kin), math.sin(aero.alpha_kin)
    f_seg = np.array([ca * f_aero[0] - sa * f_aero[2], f_aero[1], sa * f_aero[0] + ca * f_aero[2]])
    f_body = seg.frame @ f_seg
    r = segment_position(seg, epsilon)
    m_cm = seg.frame @ np.array([0.0, c_m * qa * seg.chord, 0.0])
    return LoadSet(f_body, cross(r, f_body) + m_cm)


@dataclass
class WingArrays:
    """Segment geometry of both wings stacked port first, each root to tip."""

    n_port: int
    index: np.ndarray
    hinge_sign: np.ndarray
    r_ac: np.ndarray
    frames: np.ndarray
    hinge: np.ndarray
    chord: np.ndarray
    area: np.ndarray
    twist: np.ndarray
    flat: bool  # every frame is the identity
    hinged: bool  # hinge line off the aerodynamic centres
    twisted: bool
    _commands: dict = field(default_factory=dict, repr=False)

    def commands(self, eps_p: float, eps_s: float, polars: AirfoilPolars, mode) -> tuple[np.ndarray, np.ndarray]:
        """Per-segment signed rotation ``hinge_sign * eps`` and hover-polar weight."""
        key = (eps_p, eps_s, id(polars), mode)
        hit = self._commands.get(key)
        if hit is not None and hit[2] is polars:
            return hit[0], hit[1]
        n_p = self.n_port
        eps = np.empty(len(self.chord))
        eps[:n_p], eps[n_p:] = eps_p, eps_s
        if mode is None:
            weight = np.empty_like(eps)
            weight[:n_p], weight[n_p:] = polars.hover_weight(eps_p), polars.hover_weight(eps_s)
        else:
            weight = np.full_like(eps, {"cruise": 0.0, "hover": 1.0}[mode])
        if len(self._commands) > 256:
            self._commands.clear()
        self._commands[key] = (self.hinge_sign * eps, weight, polars)
        return self.hinge_sign * eps, weight


def wing_arrays(airframe) -> WingArrays:
    cached = airframe.__dict__.get("_wing_arrays")
    if cached is not None:
        return cached
    port = sorted(airframe.port, key=lambda s: s.index)
    stbd = sorted(airframe.starboard, key=lambda s: s.index)
    segs = port + stbd
    frames = np.array([s.frame for s in segs])
    out = WingArrays(
        n_port=len(port),
        index=np.array([s.index for s in segs]),
        hinge_sign=np.array([float(s.side.hinge_sign) for s in segs]),
        r_ac=np.array([s.r_ac for s in segs]),
        frames=frames,
        hinge=np.array([s.hinge_point for s in segs]),
        chord=np.array([s.chord for s in segs]),
        area=np.array([s.area for s in segs]),
        twist=np.array([s.twist for s in segs]),
        flat=bool(np.all(frames == np.eye(3))),
        hinged=any(s.hinge_offset != 0.0 for s in segs),
        twisted=any(s.twist != 0.0 for s in segs),
    )
    object.__setattr__(airframe, "_wing_arrays", out)
    return out


@dataclass
class WingSide:
    """Per-segment results for one wing, ordered root to tip."""

    side: Side
    index: np.ndarray
    alpha_kin: np.ndarray
    alpha_eff: np.ndarray
    reynolds: np.ndarray
    V_air: np.ndarray
    force: np.ndarray  # (n, 3)
    moment: np.ndarray  # (n, 3)


def _hinged_positions(arr: WingArrays, eps_p: float, eps_s: float) -> np.ndarray:
    r = arr.r_ac.copy()
    for sl, eps in ((slice(0, arr.n_port), eps_p), (slice(arr.n_port, None), eps_s)):
        if eps == 0.0:
            continue
        rot = rot_y(arr.hinge_sign[sl][0] * eps)
        rel = arr.r_ac[sl] - arr.hinge[sl]
        full = np.einsum("nij,jk,nlk->nil", arr.frames[sl], rot, arr.frames[sl])
        r[sl] = arr.hinge[sl] + np.einsum("nij,nj->ni", full, rel)
    return r


def _mixed_coeffs(polars: AirfoilPolars, re, alpha, weight):
    if not weight.any():
        return lookup_coeffs(polars.cruise, re, alpha)
    if np.all(weight == 1.0):
        return lookup_coeffs(polars.hover, re, alpha)
    c = lookup_coeffs(polars.cruise, re, alpha)
    h = lookup_coeffs(polars.hover, re, alpha)
    return tuple((1.0 - weight) * a + weight * b for a, b in zip(c, h))


def evaluate_wing(state, airframe, act: ActuationInput, polars: AirfoilPolars, env: Environment, mode=None):
    """Per-segment loads for both wings; returns ``(port, starboard)``."""
    arr = wing_arrays(airframe)
    n_p = arr.n_port
    eps_p, eps_s = act.epsilon_p, act.epsilon_s
    signed_eps, weight = arr.commands(eps_p, eps_s, polars, mode)

    r = _hinged_positions(arr, eps_p, eps_s) if arr.hinged else arr.r_ac
    v_loc = state.v + cross(state.w, r)
    wind = env.wind
    if wind[0] != 0.0 or wind[1] != 0.0 or wind[2] != 0.0:
        v_loc = v_loc - quat_to_matrix(state.q_att).T @ wind
    if not arr.flat:
        v_loc = np.einsum("nji,nj->ni", arr.frames, v_loc)
    vx, vz = v_loc[:, 0], v_loc[:, 2]
    V = np.hypot(vx, vz)
    a_kin = np.arctan2(vz, vx)
    if V.min() <= V_EPS:
        a_kin[V <= V_EPS] = 0.0
    a_eff = wrap_angle(a_kin + signed_eps)
    if arr.twisted:
        a_eff = wrap_angle(a_eff + arr.twist)
    re = env.rho * V * arr.chord / env.mu
    c_l, c_d, c_m = _mixed_coeffs(polars, np.maximum(re, 1.0), a_eff, weight)

    qa = 0.5 * env.rho * V * V * arr.area
    lift, drag = c_l * qa, c_d * qa
    ca, sa = np.cos(a_kin), np.sin(a_kin)
    f = np.empty((len(V), 3))
    f[:, 0] = ca * -drag - sa * -lift
    f[:, 1] = 0.0
    f[:, 2] = sa * -drag + ca * -lift
    pitch = c_m * qa * arr.chord
    if arr.flat:
        m = cross(r, f)
        m[:, 1] += pitch
    else:
        f = np.einsum("nij,nj->ni", arr.frames, f)
        m = cross(r, f) + arr.frames[:, :, 1] * pitch[:, None]

    def part(side, sl):
        return WingSide(side, arr.index[sl], a_kin[sl], a_eff[sl], re[sl], V[sl], f[sl], m[sl])

    return part(Side.PORT, slice(0, n_p)), part(Side.STARBOARD, slice(n_p, None))


def sum_wing(port: WingSide, stbd: WingSide) -> LoadSet:
    """Sum segment loads pairwise by index, root to tip, port before starboard."""
    force = (port.force + stbd.force).sum(axis=0)
    moment = (port.moment + stbd.moment).sum(axis=0)
    if not (np.all(np.isfinite(force)) and np.all(np.isfinite(moment))):
        raise NonFiniteCoefficient("non-finite aerodynamic load")
    return LoadSet(force, moment)


def total_aero_loads(state, airframe, act: ActuationInput, polars: AirfoilPolars, env: Environment, mode=None) -> LoadSet:
    return sum_wing(*evaluate_wing(state, airframe, act, polars, env, mode))
