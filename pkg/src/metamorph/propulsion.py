"""Idealized wing-mounted thrusters.

A thruster is a force along the local chord line of its wing segment. It
tilts with the wing's hinge rotation: port wings rotate nose-down and
starboard wings nose-up for a positive command, so the tilted thrust has a
body z-component of ``+T sin(eps)`` on the port side and ``-T sin(eps)`` on
the starboard side. Equal thrusts at equal commands therefore form a couple
about body x, which is what spins the vehicle up in hover.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .frames import LoadSet, Side, cross, rot_y


class ThrustOutOfRange(UserWarning):
    """Commanded thrust outside [0, max_thrust]; the value was clamped."""


@dataclass(frozen=True)
class ThrusterSpec:
    id: str
    side: Side
    r_thrust: np.ndarray  # body frame at eps = 0, CoM-relative [m]
    max_thrust: float = 3.0
    hinge_point: np.ndarray | None = None  # a point on the hinge line; defaults to r_thrust

    def __post_init__(self):
        object.__setattr__(self, "r_thrust", np.asarray(self.r_thrust, dtype=float).reshape(3))
        if self.hinge_point is not None:
            object.__setattr__(self, "hinge_point", np.asarray(self.hinge_point, dtype=float).reshape(3))
        if not self.max_thrust > 0:
            raise ValueError(f"thruster {self.id!r}: max_thrust must be positive")


def clamp_thrust(spec: ThrusterSpec, thrust: float) -> float:
    if not math.isfinite(thrust):
        raise ValueError(f"thruster {spec.id!r}: non-finite thrust command {thrust}")
    if thrust < 0.0 or thrust > spec.max_thrust:
        clamped = min(max(thrust, 0.0), spec.max_thrust)
        warnings.warn(
            f"thruster {spec.id!r}: command {thrust:g} N clamped to {clamped:g} N",
            ThrustOutOfRange,
            stacklevel=3,
        )
        return clamped
    return thrust


def hinge_rotation(side: Side, epsilon: float) -> np.ndarray:
    """Body-frame rotation of a wing about its spanwise hinge axis."""
    return rot_y(side.hinge_sign * epsilon)


def thrust_load(spec: ThrusterSpec, thrust: float, act) -> LoadSet:
    """Force and moment of one thruster for the commanded wing rotation in ``act``."""
    thrust = clamp_thrust(spec, thrust)
    eps = act.epsilon(spec.side)
    c, s = math.cos(eps), math.sin(eps)
    # hinge_sign: -1 port, +1 starboard; rot_y(h*eps) @ x_hat = (cos, 0, -h sin)
    force = np.array([thrust * c, 0.0, -spec.side.hinge_sign * thrust * s])
    r = rotated_position(spec.r_thrust, spec.hinge_point, spec.side, eps)
    return LoadSet(force, cross(r, force))


def rotated_position(r: np.ndarray, hinge_point, side: Side, epsilon: float) -> np.ndarray:
    if hinge_point is None or epsilon == 0.0:
        return r
    return hinge_point + hinge_rotation(side, epsilon) @ (r - hinge_point)
