"""Wing parametrization, spanwise segmentation and mass properties."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .frames import Side, rot_x, rot_y
from .propulsion import ThrusterSpec


class InvalidSpec(ValueError):
    pass


class ZeroArea(ValueError):
    pass


@dataclass(frozen=True)
class WingSpec:
    """Planform of the full wing; defaults reproduce the first prototype."""

    wingspan: float = 0.70
    root_chord: float = 0.160
    taper_ratio: float = 0.688
    sweep: float = 0.0  # quarter-chord sweep [rad]
    dihedral: float = 0.0  # [rad]
    twist: float = 0.0  # tip incidence relative to root, linear in span [rad]
    segments_per_side: int = 8
    airfoil_cruise: str = "E387"
    airfoil_hover: str = "NACA0010"
    hinge_offset: float = 0.0  # hinge line ahead of the quarter-chord line [m]

    def __post_init__(self):
        if not self.wingspan > 0 or not self.root_chord > 0:
            raise InvalidSpec("wingspan and root_chord must be positive")
        if not 0.0 < self.taper_ratio <= 1.0:
            raise InvalidSpec(f"taper_ratio must lie in (0, 1], got {self.taper_ratio}")
        if int(self.segments_per_side) != self.segments_per_side or self.segments_per_side < 1:
            raise InvalidSpec("segments_per_side must be an integer >= 1")
        if abs(self.sweep) >= math.pi / 2 or abs(self.dihedral) >= math.pi / 2:
            raise InvalidSpec("sweep and dihedral must be within (-90, 90) degrees")

    @property
    def half_span(self) -> float:
        return 0.5 * self.wingspan

    def chord_at(self, y: float) -> float:
        return self.root_chord * (1.0 - (1.0 - self.taper_ratio) * abs(y) / self.half_span)

    @property
    def trapezoid_area(self) -> float:
        return self.wingspan * self.root_chord * (1.0 + self.taper_ratio) / 2.0


@dataclass(frozen=True)
class MassProperties:
    m_uav: float = 0.450
    inertia: np.ndarray | None = None  # 3x3 body-frame tensor [kg m^2]; None -> default_inertia
    cg_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))  # CoM relative to the wing reference point

    def __post_init__(self):
        if not self.m_uav > 0:
            raise InvalidSpec("m_uav must be positive")
        object.__setattr__(self, "cg_offset", np.asarray(self.cg_offset, dtype=float).reshape(3))
        if self.inertia is not None:
            inertia = np.asarray(self.inertia, dtype=float).reshape(3, 3)
            check_inertia(inertia)
            object.__setattr__(self, "inertia", inertia)


def check_inertia(inertia: np.ndarray) -> None:
    if not np.allclose(inertia, inertia.T, rtol=0, atol=1e-15 * max(1.0, np.abs(inertia).max())):
        raise InvalidSpec("inertia tensor must be symmetric")
    eig = np.linalg.eigvalsh(inertia)
    if np.any(eig <= 0):
        raise InvalidSpec("inertia tensor must be positive definite")
    a, b, c = eig
    tol = 1e-12 * eig.sum()
    if a + b < c - tol:
        raise InvalidSpec("principal moments violate the triangle inequality")


@dataclass(frozen=True)
class SegmentGeometry:
    side: Side
    index: int  # 1 at the root
    span_width: float
    chord: float
    area: float
    r_ac: np.ndarray  # CoM-relative, body frame, eps = 0
    frame: np.ndarray  # segment -> body rotation at eps = 0 (dihedral)
    twist: float = 0.0
    has_thruster: bool = False
    r_thrust: np.ndarray | None = None

    hinge_offset: float = 0.0  # hinge line ahead of the aerodynamic centre [m]

    @property
    def hinge_point(self) -> np.ndarray:
        """Point of the hinge line at this segment's midspan."""
        return self.r_ac + self.frame @ np.array([self.hinge_offset, 0.0, 0.0])


def segment_wing(wing: WingSpec, cg_offset=None) -> list[SegmentGeometry]:
    """Split each half-span into equal-width strips, root first, port then starboard.

    Aerodynamic centres sit on the local quarter-chord line; with zero sweep
    that line passes through the wing reference point, which is also the CoM
    unless ``cg_offset`` moves it.
    """
    cg = np.zeros(3) if cg_offset is None else np.asarray(cg_offset, dtype=float)
    n = int(wing.segments_per_side)
    b_seg = wing.half_span / n
    segs = []
    for side in (Side.PORT, Side.STARBOARD):
        frame = rot_x(-side.y_sign * wing.dihedral)
        for i in range(1, n + 1):
            s = (i - 0.5) * b_seg  # distance along the half-span
            chord = wing.chord_at(s)
            pos = np.array(
                [
                    -s * math.tan(wing.sweep),
                    side.y_sign * s * math.cos(wing.dihedral),
                    -s * math.sin(wing.dihedral),
                ]
            )
            if wing.dihedral == 0.0:
                pos[1] = side.y_sign * s
            segs.append(
                SegmentGeometry(
                    side=side,
                    index=i,
                    span_width=b_seg,
                    chord=chord,
                    area=chord * b_seg,
                    r_ac=pos - cg,
                    frame=frame,
                    twist=wing.twist * s / wing.half_span,
                    hinge_offset=wing.hinge_offset,
                )
            )
    return segs


def total_area(segments) -> float:
    return math.fsum(s.area for s in segments)


def wing_loading(mass: MassProperties | float, wing: WingSpec | float) -> float:
    """Mass per unit wing area [kg/m^2]; ``wing`` may be a spec or an area."""
    m = mass.m_uav if isinstance(mass, MassProperties) else float(mass)
    area = total_area(segment_wing(wing)) if isinstance(wing, WingSpec) else float(wing)
    if not area > 0:
        raise ZeroArea("total wing area must be positive")
    return m / area


def lamina_inertia(mass: float, length_x: float, length_y: float) -> np.ndarray:
    """Thin rectangular plate in its own x-y plane, about its centroid."""
    return (mass / 12.0) * np.diag([length_y**2, length_x**2, length_x**2 + length_y**2])


def default_inertia(
    wing: WingSpec, mass: MassProperties, wing_mass_fraction: float = 0.4, epsilon: float = 0.0
) -> np.ndarray:
    """Inertia of flat-plate wing segments plus a point-mass fuselage at the CoM.

    Each segment is a rectangular lamina of mass proportional to its area,
    centred at its mid-chord. ``epsilon`` rotates both wings about their hinge
    lines as the joint command ``eps_P = eps_S = epsilon`` would. Used when no
    explicit tensor is configured.
    """
    segs = segment_wing(wing, mass.cg_offset)
    area = total_area(segs)
    m_wing = wing_mass_fraction * mass.m_uav

    def plate(seg):
        m = m_wing * seg.area / area
        rot = seg.frame @ rot_y(seg.side.hinge_sign * epsilon) @ seg.frame.T
        local = rot @ seg.frame @ lamina_inertia(m, seg.chord, seg.span_width) @ seg.frame.T @ rot.T
        hinge = seg.hinge_point
        centroid = seg.r_ac - seg.frame @ np.array([0.25 * seg.chord, 0.0, 0.0])
        d = hinge + rot @ (centroid - hinge)
        return local + m * (d @ d * np.eye(3) - np.outer(d, d))

    # pairwise port + starboard so mirrored contributions cancel exactly
    port = sorted((s for s in segs if s.side is Side.PORT), key=lambda s: s.index)
    stbd = sorted((s for s in segs if s.side is Side.STARBOARD), key=lambda s: s.index)
    inertia = np.zeros((3, 3))
    for sp, ss in zip(port, stbd):
        inertia += plate(sp) + plate(ss)
    return 0.5 * (inertia + inertia.T)


def default_thrusters(segments, max_thrust: float = 3.0) -> tuple[ThrusterSpec, ...]:
    """One thruster on the outermost segment of each side, on its hinge line."""
    out = []
    for side, name in ((Side.PORT, "port"), (Side.STARBOARD, "starboard")):
        tip = max((s for s in segments if s.side is side), key=lambda s: s.index)
        out.append(ThrusterSpec(name, side, tip.hinge_point.copy(), max_thrust, tip.hinge_point.copy()))
    return tuple(out)


@dataclass(frozen=True)
class Airframe:
    """Everything geometric and inertial about the vehicle, ready to simulate."""

    wing: WingSpec
    mass: MassProperties
    thrusters: tuple[ThrusterSpec, ...]
    segments: tuple[SegmentGeometry, ...]
    inertia: np.ndarray
    inertia_inv: np.ndarray = field(repr=False)
    wing_mass_fraction: float = 0.4

    def inertia_at(self, epsilon: float | None) -> tuple[np.ndarray, np.ndarray]:
        """Inertia and its inverse with both joints held at ``epsilon``.

        An explicitly configured tensor is returned unchanged, as is the
        stored one when ``epsilon`` is None.
        """
        if epsilon is None or self.mass.inertia is not None:
            return self.inertia, self.inertia_inv
        inertia = default_inertia(self.wing, self.mass, self.wing_mass_fraction, epsilon)
        check_inertia(inertia)
        return inertia, np.linalg.inv(inertia)

    @property
    def port(self) -> tuple[SegmentGeometry, ...]:
        return tuple(s for s in self.segments if s.side is Side.PORT)

    @property
    def starboard(self) -> tuple[SegmentGeometry, ...]:
        return tuple(s for s in self.segments if s.side is Side.STARBOARD)


def build_airframe(
    wing: WingSpec | None = None,
    mass: MassProperties | None = None,
    thrusters=None,
    wing_mass_fraction: float = 0.4,
) -> Airframe:
    wing = wing or WingSpec()
    mass = mass or MassProperties()
    segs = segment_wing(wing, mass.cg_offset)
    if thrusters is None:
        thrusters = default_thrusters(segs)
    thrusters = tuple(thrusters)
    flagged = []
    for seg in segs:
        mounted = [t for t in thrusters if t.side is seg.side and np.allclose(t.r_thrust[1], seg.r_ac[1])]
        if mounted:
            seg = SegmentGeometry(**{**seg.__dict__, "has_thruster": True, "r_thrust": mounted[0].r_thrust})
        flagged.append(seg)
    inertia = mass.inertia if mass.inertia is not None else default_inertia(wing, mass, wing_mass_fraction)
    check_inertia(inertia)
    return Airframe(wing, mass, thrusters, tuple(flagged), inertia, np.linalg.inv(inertia), wing_mass_fraction)
