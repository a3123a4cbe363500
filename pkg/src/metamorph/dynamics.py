"""Rigid-body 6-DoF core: load summation, Newton-Euler equations, RK4, ground contact."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .environment import Environment
from .frames import LoadSet, cross, euler_from_matrix, quat_multiply, quat_to_matrix

DT_MAX = 0.01


class SimulationDiverged(RuntimeError):
    """Raised when the state stops being finite; carries the offending state."""

    def __init__(self, message: str, state=None, loads=None):
        super().__init__(message)
        self.state = state
        self.loads = loads

    def diagnostics(self) -> dict:
        out = {"message": str(self)}
        if self.state is not None:
            out["state"] = self.state.as_dict()
        if self.loads is not None:
            out["force"] = self.loads.force.tolist()
            out["moment"] = self.loads.moment.tolist()
        return out


@dataclass(frozen=True)
class RigidBodyState:
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))  # world [m]
    q_att: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))  # body -> world
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))  # body [m/s]
    w: np.ndarray = field(default_factory=lambda: np.zeros(3))  # body [rad/s]
    t: float = 0.0

    def __post_init__(self):
        for name, n in (("p", 3), ("q_att", 4), ("v", 3), ("w", 3)):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=float).reshape(n))

    @property
    def rotation(self) -> np.ndarray:
        """Body -> world rotation matrix."""
        return quat_to_matrix(self.q_att)

    @property
    def euler(self) -> tuple[float, float, float]:
        return euler_from_matrix(self.rotation)

    @property
    def v_world(self) -> np.ndarray:
        return self.rotation @ self.v

    def to_vector(self) -> np.ndarray:
        return np.concatenate((self.p, self.q_att, self.v, self.w))

    @classmethod
    def from_vector(cls, x: np.ndarray, t: float) -> "RigidBodyState":
        return cls(x[0:3], x[3:7], x[7:10], x[10:13], t)

    def normalized(self) -> "RigidBodyState":
        return RigidBodyState(self.p, self.q_att / np.linalg.norm(self.q_att), self.v, self.w, self.t)

    def is_finite(self) -> bool:
        return math.isfinite(float(self.to_vector().sum()) + self.t)

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "p": self.p.tolist(),
            "q_att": self.q_att.tolist(),
            "v": self.v.tolist(),
            "w": self.w.tolist(),
        }


def gravity_body(state: RigidBodyState, mass: float, g: float = 9.81) -> LoadSet:
    """Weight expressed in the body frame; no moment about the CoM."""
    r = state.rotation
    return LoadSet(r.T @ np.array([0.0, 0.0, -mass * g]), np.zeros(3))


def sum_loads(aero: LoadSet, thrust, gravity: LoadSet) -> LoadSet:
    total = LoadSet(gravity.force + aero.force, aero.moment.copy())
    for t in thrust:
        total = total + t
    return total


def ground_contact(state: RigidBodyState, mass: float, env: Environment) -> LoadSet:
    """Penalty contact acting at the CoM below ``env.contact_height``.

    A one-sided spring-damper along world +z plus a horizontal velocity damper;
    it never pulls down and exerts no moment, so spinning about the vertical is
    unimpeded.
    """
    depth = env.contact_height - state.p[2]
    if depth <= 0.0:
        return LoadSet.zero()
    r = state.rotation
    v_w = r @ state.v
    normal = max(0.0, env.contact_stiffness * depth - env.contact_damping * v_w[2])
    f_world = np.array(
        [-env.contact_horizontal_damping * v_w[0], -env.contact_horizontal_damping * v_w[1], normal]
    )
    return LoadSet(r.T @ f_world, np.zeros(3))


def derivatives(state: RigidBodyState, loads: LoadSet, mass: float, inertia: np.ndarray, inertia_inv=None) -> np.ndarray:
    """Time derivative of the packed state ``(p, q, v, w)``."""
    if inertia_inv is None:
        inertia_inv = np.linalg.inv(inertia)
    v, w = state.v, state.w
    p_dot = quat_to_matrix(state.q_att) @ v
    q_dot = 0.5 * quat_multiply(state.q_att, np.array([0.0, w[0], w[1], w[2]]))
    v_dot = loads.force / mass - cross(w, v)
    w_dot = inertia_inv @ (loads.moment - cross(w, inertia @ w))
    return np.concatenate((p_dot, q_dot, v_dot, w_dot))


def step(
    state: RigidBodyState,
    loads_fn: Callable[[RigidBodyState], LoadSet],
    dt: float,
    mass: float,
    inertia: np.ndarray,
    inertia_inv=None,
) -> RigidBodyState:
    """One classical RK4 step; loads are re-evaluated at every stage."""
    if not 0.0 < dt <= DT_MAX:
        raise ValueError(f"dt must lie in (0, {DT_MAX}], got {dt}")
    if inertia_inv is None:
        inertia_inv = np.linalg.inv(inertia)
    x0 = state.to_vector()
    t0 = state.t

    def f(x, t):
        s = RigidBodyState.from_vector(x, t)
        loads = loads_fn(s)
        if not loads.is_finite():
            raise SimulationDiverged(f"non-finite loads at t={t:.6f}", s, loads)
        return derivatives(s, loads, mass, inertia, inertia_inv)

    k1 = f(x0, t0)
    k2 = f(x0 + 0.5 * dt * k1, t0 + 0.5 * dt)
    k3 = f(x0 + 0.5 * dt * k2, t0 + 0.5 * dt)
    k4 = f(x0 + dt * k3, t0 + dt)
    x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    new = RigidBodyState.from_vector(x1, t0 + dt)
    if not new.is_finite():
        raise SimulationDiverged(f"non-finite state after step to t={t0 + dt:.6f}", state)
    return new.normalized()
