"""Reference frames, rotations and the body-frame load currency.

Conventions used throughout the package:

* body frame: x forward (nose), y toward starboard, z down;
* world frame: z up, gravity along -z;
* quaternions are scalar-first ``(w, x, y, z)`` and rotate body vectors into
  the world frame;
* reported Euler angles are ZYX (yaw, pitch, roll) of the body relative to a
  north-east-down view of the world frame, i.e. the world frame with its y and
  z axes flipped. Level cruise flight therefore reads ``phi = theta = psi = 0``
  and the hover attitude (nose straight up) reads ``theta = +pi/2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# world <-> north-east-down view
NED_FLIP = np.diag([1.0, -1.0, -1.0])


class Side(enum.Enum):
    PORT = "P"
    STARBOARD = "S"

    @property
    def y_sign(self) -> float:
        """Sign of the body y-coordinate of this wing."""
        return -1.0 if self is Side.PORT else 1.0

    @property
    def hinge_sign(self) -> float:
        """Sign with which the commanded wing rotation enters alpha.

        Port rotates nose-down and starboard nose-up for a positive command,
        about their outward hinge axes.
        """
        return -1.0 if self is Side.PORT else 1.0

    @property
    def mirror(self) -> "Side":
        return Side.STARBOARD if self is Side.PORT else Side.PORT


@dataclass(frozen=True)
class LoadSet:
    """Force [N] and moment about the CoM [N m], both in the body frame."""

    force: np.ndarray
    moment: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float).reshape(3))
        object.__setattr__(self, "moment", np.asarray(self.moment, dtype=float).reshape(3))

    @classmethod
    def zero(cls) -> "LoadSet":
        return cls(np.zeros(3), np.zeros(3))

    def __add__(self, other: "LoadSet") -> "LoadSet":
        return LoadSet(self.force + other.force, self.moment + other.moment)

    def is_finite(self) -> bool:
        # a sum is non-finite iff some term is (inf - inf gives nan)
        return math.isfinite(float(self.force.sum() + self.moment.sum()))


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def wind_to_body(alpha_kin: float) -> np.ndarray:
    """Rotation taking a wind-frame vector into the segment/body frame."""
    c, s = math.cos(alpha_kin), math.sin(alpha_kin)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Body->world rotation matrix; tolerates a slightly non-unit quaternion."""
    w, x, y, z = q
    n = w * w + x * x + y * y + z * z
    s = 2.0 / n
    return np.array(
        [
            [1.0 - s * (y * y + z * z), s * (x * y - w * z), s * (x * z + w * y)],
            [s * (x * y + w * z), 1.0 - s * (x * x + z * z), s * (y * z - w * x)],
            [s * (x * z - w * y), s * (y * z + w * x), 1.0 - s * (x * x + y * y)],
        ]
    )


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    h = 0.5 * angle
    return np.concatenate(([math.cos(h)], math.sin(h) * axis))


def matrix_to_quat(m: np.ndarray) -> np.ndarray:
    """Shepperd's method; returns the quaternion with w >= 0."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    candidates = [tr, m[0, 0], m[1, 1], m[2, 2]]
    k = int(np.argmax(candidates))
    if k == 0:
        r = math.sqrt(1.0 + tr) * 2.0
        q = [0.25 * r, (m[2, 1] - m[1, 2]) / r, (m[0, 2] - m[2, 0]) / r, (m[1, 0] - m[0, 1]) / r]
    elif k == 1:
        r = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = [(m[2, 1] - m[1, 2]) / r, 0.25 * r, (m[0, 1] + m[1, 0]) / r, (m[0, 2] + m[2, 0]) / r]
    elif k == 2:
        r = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = [(m[0, 2] - m[2, 0]) / r, (m[0, 1] + m[1, 0]) / r, 0.25 * r, (m[1, 2] + m[2, 1]) / r]
    else:
        r = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = [(m[1, 0] - m[0, 1]) / r, (m[0, 2] + m[2, 0]) / r, (m[1, 2] + m[2, 1]) / r, 0.25 * r]
    q = np.array(q)
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


def quat_from_euler(phi: float, theta: float, psi: float) -> np.ndarray:
    """Attitude quaternion from ZYX Euler angles relative to the NED view."""
    r_ned = rot_z(psi) @ rot_y(theta) @ rot_x(phi)
    return matrix_to_quat(NED_FLIP @ r_ned)


def euler_from_matrix(r_body_to_world: np.ndarray) -> tuple[float, float, float]:
    """ZYX Euler angles (phi, theta, psi) relative to the NED view."""
    r = NED_FLIP @ r_body_to_world
    phi = math.atan2(r[2, 1], r[2, 2])
    theta = math.asin(max(-1.0, min(1.0, -r[2, 0])))
    psi = math.atan2(r[1, 0], r[0, 0])
    return phi, theta, psi


def wrap_angle(a):
    """Wrap to [-pi, pi]; values already inside are returned bit-exact."""
    if np.ndim(a) == 0:
        return math.remainder(float(a), 2.0 * math.pi)
    a = np.asarray(a, dtype=float)
    if a.size == 0 or np.abs(a).max() <= math.pi:
        return a
    return np.where(np.abs(a) > math.pi, a - 2.0 * math.pi * np.round(a / (2.0 * math.pi)), a)


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product over the last axis; cheaper than ``np.cross`` for tiny arrays."""
    if a.ndim == 1:
        ax, ay, az = a.tolist()
        if b.ndim == 1:
            bx, by, bz = b.tolist()
            return np.array((ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx))
    else:
        ax, ay, az = a[..., 0], a[..., 1], a[..., 2]
    bx, by, bz = b[..., 0], b[..., 1], b[..., 2]
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = ay * bz - az * by
    out[..., 1] = az * bx - ax * bz
    out[..., 2] = ax * by - ay * bx
    return out
