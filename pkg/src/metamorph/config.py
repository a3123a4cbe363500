"""Strict TOML configuration for the vehicle, environment, polars and scenarios.

Every table accepts a fixed set of keys; anything else is an error that
names the file and line, so a misspelt constant never silently falls back to
its default. Angles are written in degrees in the files and converted here.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import tomli

from .aero import ActuationInput, AirfoilPolars
from .airframe import Airframe, InvalidSpec, MassProperties, WingSpec, build_airframe
from .dynamics import RigidBodyState
from .environment import Environment
from .frames import Side, quat_from_euler
from .polar_db import load_surface
from .propulsion import ThrusterSpec
from . import scenario as sc

POLAR_DIR_ENV = "METAMORPH_POLAR_DIR"


class ConfigError(ValueError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.message = message
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


_NUM = (int, float)
_VEC3 = "vec3"
_MAT3 = "mat3"
_NUMLIST = "numlist"

SCHEMA = {
    "airframe": {
        "wingspan": _NUM,
        "root_chord": _NUM,
        "taper_ratio": _NUM,
        "sweep_deg": _NUM,
        "dihedral_deg": _NUM,
        "twist_deg": _NUM,
        "segments_per_side": int,
        "airfoil_cruise": str,
        "airfoil_hover": str,
        "hinge_offset": _NUM,
    },
    "mass": {"m_uav": _NUM, "cg_offset": _VEC3, "inertia": _MAT3, "wing_mass_fraction": _NUM},
    "thruster": {"id": str, "side": str, "position": _VEC3, "max_thrust": _NUM, "hinge_point": _VEC3},
    "environment": {
        "rho": _NUM,
        "g": _NUM,
        "mu": _NUM,
        "wind": _VEC3,
        "contact_height": _NUM,
        "contact_stiffness": _NUM,
        "contact_damping": _NUM,
        "contact_horizontal_damping": _NUM,
    },
    "polars": {"dir": str, "flat_plate_cd0": _NUM, "cruise_limit_deg": _NUM, "hover_limit_deg": _NUM},
    "sim": {"dt": _NUM, "output_every": int, "out_dir": str, "duration": _NUM},
    "hover": {"joint_deg": _NUM, "spinup_thrust": _NUM, "thrust_levels": _NUMLIST, "phase_duration": _NUM},
    "cruise": {"base_thrust": _NUM, "altitude": _NUM, "roll_step_deg": _NUM},
    "scenario": {
        "name": str,
        "duration": _NUM,
        "ground_contact": bool,
        "airfoil_mode": str,
        "initial": str,
        "position": _VEC3,
        "euler_deg": _VEC3,
        "velocity": _VEC3,
        "rates": _VEC3,
        "inertia_joint_deg": _NUM,
    },
    "schedule": {"t": _NUM, "eps_p_deg": _NUM, "eps_s_deg": _NUM, "thrust_p": _NUM, "thrust_s": _NUM},
}
ARRAY_TABLES = {"thruster", "schedule"}
MAIN_SECTIONS = ("airframe", "mass", "thruster", "environment", "polars", "sim", "hover", "cruise")
SCENARIO_SECTIONS = ("scenario", "schedule")


def _locate(text: str, section: str, key: str | None = None, occurrence: int = 0) -> int | None:
    """Best-effort line number of ``key`` inside ``[section]`` (or of the header itself)."""
    lines = text.splitlines()
    header = re.compile(r"^\s*\[\[?\s*" + re.escape(section) + r"\s*\]\]?\s*(#.*)?$")
    seen = -1
    inside = False
    for i, line in enumerate(lines, start=1):
        if re.match(r"^\s*\[", line):
            inside = bool(header.match(line))
            if inside:
                seen += 1
                if key is None and seen == occurrence:
                    return i
            continue
        if inside and seen == occurrence and key is not None and re.match(r"^\s*" + re.escape(key) + r"\s*=", line):
            return i
    return None


def _check_value(kind, value) -> bool:
    if kind is _NUM:
        return isinstance(value, _NUM) and not isinstance(value, bool) and math.isfinite(value)
    if kind is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if kind is _VEC3:
        return isinstance(value, list) and len(value) == 3 and all(_check_value(_NUM, v) for v in value)
    if kind is _MAT3:
        return isinstance(value, list) and len(value) == 3 and all(_check_value(_VEC3, r) for r in value)
    if kind is _NUMLIST:
        return isinstance(value, list) and len(value) > 0 and all(_check_value(_NUM, v) for v in value)
    return isinstance(value, kind)


def validate(doc: dict, allowed_sections, text: str = "", path: str | None = None) -> None:
    """Reject unknown sections, unknown keys and ill-typed values."""
    for name, body in doc.items():
        if name not in allowed_sections:
            raise ConfigError(f"unknown section [{name}]", path, _locate(text, name))
        tables = body if name in ARRAY_TABLES else [body]
        if name in ARRAY_TABLES and not isinstance(body, list):
            raise ConfigError(f"[{name}] must be an array of tables ([[{name}]])", path, _locate(text, name))
        for k, table in enumerate(tables):
            if not isinstance(table, dict):
                raise ConfigError(f"[{name}] must be a table", path, _locate(text, name))
            for key, value in table.items():
                kind = SCHEMA[name].get(key)
                if kind is None:
                    raise ConfigError(f"unknown key {key!r} in [{name}]", path, _locate(text, name, key, k))
                if not _check_value(kind, value):
                    raise ConfigError(f"bad value for {name}.{key}: {value!r}", path, _locate(text, name, key, k))


def read_toml(path) -> tuple[dict, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax error: {exc}", str(path), int(m.group(1)) if m else None) from None
    return doc, text


@dataclass
class SimSettings:
    dt: float = 1e-3
    output_every: int = 10
    out_dir: str = "results"
    duration: float | None = None


@dataclass
class HoverSettings:
    joint_deg: float = math.degrees(sc.HOVER_JOINT)
    spinup_thrust: float = sc.SPINUP_THRUST
    thrust_levels: tuple = sc.HOVER_THRUST_LEVELS
    phase_duration: float = sc.HOVER_PHASE_DURATION


@dataclass
class CruiseSettings:
    base_thrust: float = sc.CRUISE_BASE_THRUST
    altitude: float = sc.CRUISE_ALTITUDE
    roll_step_deg: float = 1.0


@dataclass
class SimConfig:
    """Everything needed to build and run a simulation, as read from one file."""

    wing: WingSpec = field(default_factory=WingSpec)
    mass: MassProperties = field(default_factory=MassProperties)
    thrusters: list | None = None
    wing_mass_fraction: float = 0.4
    environment: Environment = field(default_factory=Environment)
    polar_dir: Path | None = None
    flat_plate_cd0: float = 0.02
    cruise_limit_deg: float = 25.0
    hover_limit_deg: float = 50.0
    sim: SimSettings = field(default_factory=SimSettings)
    hover: HoverSettings = field(default_factory=HoverSettings)
    cruise: CruiseSettings = field(default_factory=CruiseSettings)
    source: Path | None = None
    text: str = ""

    def airframe(self, segments_per_side: int | None = None) -> Airframe:
        wing = self.wing
        if segments_per_side is not None:
            wing = WingSpec(**{**wing.__dict__, "segments_per_side": segments_per_side})
        return build_airframe(wing, self.mass, self.thrusters, self.wing_mass_fraction)

    def resolve_polar_dir(self, environ=None) -> Path:
        environ = os.environ if environ is None else environ
        if self.polar_dir is not None:
            return self.polar_dir
        if environ.get(POLAR_DIR_ENV):
            return Path(environ[POLAR_DIR_ENV])
        raise ConfigError(f"no polar directory: set [polars] dir or ${POLAR_DIR_ENV}", _str(self.source))

    def polars(self, environ=None) -> AirfoilPolars:
        root = self.resolve_polar_dir(environ)
        return AirfoilPolars(
            load_surface(root / self.wing.airfoil_cruise, self.wing.airfoil_cruise, self.flat_plate_cd0),
            load_surface(root / self.wing.airfoil_hover, self.wing.airfoil_hover, self.flat_plate_cd0),
            math.radians(self.cruise_limit_deg),
            math.radians(self.hover_limit_deg),
        )

    def builtin(self, name: str, airframe: Airframe, polars: AirfoilPolars) -> sc.Scenario:
        env, h, c = self.environment, self.hover, self.cruise
        joint = math.radians(h.joint_deg)
        m = airframe.mass.m_uav
        if name == "hover_spinup":
            out = sc.hover_spinup(m, env, thrust=h.spinup_thrust, joint=joint)
        elif name == "hover_thrust":
            out = sc.hover_thrust_profile(tuple(h.thrust_levels), h.phase_duration, m, env, joint=joint)
        elif name == "cruise_roll":
            out = sc.cruise_roll(airframe, polars, env, delta=math.radians(c.roll_step_deg), altitude=c.altitude)
        elif name == "cruise_yaw":
            out = sc.cruise_yaw(airframe, polars, env, base_thrust=c.base_thrust, altitude=c.altitude)
        else:
            raise ConfigError(f"unknown built-in scenario {name!r}; choose from {', '.join(sc.BUILTINS)}")
        if self.sim.duration is not None:
            out = replace(out, duration=self.sim.duration)
        return out


def _str(p) -> str | None:
    return None if p is None else str(p)


def _wrap(exc: Exception, text: str, path: str | None, section: str) -> ConfigError:
    return ConfigError(str(exc), path, _locate(text, section))


def load_config(path) -> SimConfig:
    """Parse the main configuration file."""
    path = Path(path)
    doc, text = read_toml(path)
    p = str(path)
    validate(doc, MAIN_SECTIONS, text, p)
    cfg = SimConfig(source=path, text=text)

    a = doc.get("airframe", {})
    try:
        cfg.wing = WingSpec(
            wingspan=float(a.get("wingspan", 0.70)),
            root_chord=float(a.get("root_chord", 0.160)),
            taper_ratio=float(a.get("taper_ratio", 0.688)),
            sweep=math.radians(a.get("sweep_deg", 0.0)),
            dihedral=math.radians(a.get("dihedral_deg", 0.0)),
            twist=math.radians(a.get("twist_deg", 0.0)),
            segments_per_side=a.get("segments_per_side", 8),
            airfoil_cruise=a.get("airfoil_cruise", "E387"),
            airfoil_hover=a.get("airfoil_hover", "NACA0010"),
            hinge_offset=float(a.get("hinge_offset", 0.0)),
        )
    except InvalidSpec as exc:
        raise _wrap(exc, text, p, "airframe") from None

    m = doc.get("mass", {})
    try:
        cfg.mass = MassProperties(
            m_uav=float(m.get("m_uav", 0.450)),
            inertia=None if "inertia" not in m else np.array(m["inertia"], dtype=float),
            cg_offset=np.array(m.get("cg_offset", [0.0, 0.0, 0.0]), dtype=float),
        )
    except InvalidSpec as exc:
        raise _wrap(exc, text, p, "mass") from None
    cfg.wing_mass_fraction = float(m.get("wing_mass_fraction", 0.4))
    if not 0.0 < cfg.wing_mass_fraction <= 1.0:
        raise ConfigError("mass.wing_mass_fraction must lie in (0, 1]", p, _locate(text, "mass", "wing_mass_fraction"))

    if "thruster" in doc:
        specs = []
        for k, t in enumerate(doc["thruster"]):
            for req in ("id", "side", "position"):
                if req not in t:
                    raise ConfigError(f"[[thruster]] entry missing {req!r}", p, _locate(text, "thruster", None, k))
            try:
                side = {"port": Side.PORT, "starboard": Side.STARBOARD}[t["side"]]
            except KeyError:
                raise ConfigError(
                    f"thruster side must be 'port' or 'starboard', got {t['side']!r}", p, _locate(text, "thruster", "side", k)
                ) from None
            pos = np.array(t["position"], dtype=float)
            hinge = np.array(t.get("hinge_point", t["position"]), dtype=float)
            try:
                specs.append(ThrusterSpec(t["id"], side, pos, float(t.get("max_thrust", 3.0)), hinge))
            except ValueError as exc:
                raise ConfigError(str(exc), p, _locate(text, "thruster", None, k)) from None
        ids = [s.id for s in specs]
        if len(set(ids)) != len(ids):
            raise ConfigError("thruster ids must be unique", p, _locate(text, "thruster"))
        cfg.thrusters = specs

    e = doc.get("environment", {})
    try:
        cfg.environment = Environment(**{k: (np.array(v) if k == "wind" else float(v)) for k, v in e.items()})
    except ValueError as exc:
        raise _wrap(exc, text, p, "environment") from None

    pol = doc.get("polars", {})
    if "dir" in pol:
        d = Path(pol["dir"])
        cfg.polar_dir = d if d.is_absolute() else (path.parent / d)
    cfg.flat_plate_cd0 = float(pol.get("flat_plate_cd0", 0.02))
    cfg.cruise_limit_deg = float(pol.get("cruise_limit_deg", 25.0))
    cfg.hover_limit_deg = float(pol.get("hover_limit_deg", 50.0))
    if not cfg.flat_plate_cd0 > 0:
        raise ConfigError("polars.flat_plate_cd0 must be positive", p, _locate(text, "polars", "flat_plate_cd0"))
    if not 0.0 <= cfg.cruise_limit_deg < cfg.hover_limit_deg <= 90.0:
        raise ConfigError("need 0 <= cruise_limit_deg < hover_limit_deg <= 90", p, _locate(text, "polars"))

    s = doc.get("sim", {})
    cfg.sim = SimSettings(
        dt=float(s.get("dt", 1e-3)),
        output_every=s.get("output_every", 10),
        out_dir=s.get("out_dir", "results"),
        duration=None if "duration" not in s else float(s["duration"]),
    )
    if not 0.0 < cfg.sim.dt <= 0.01:
        raise ConfigError("sim.dt must lie in (0, 0.01]", p, _locate(text, "sim", "dt"))
    if cfg.sim.output_every < 1:
        raise ConfigError("sim.output_every must be >= 1", p, _locate(text, "sim", "output_every"))
    if cfg.sim.duration is not None and not cfg.sim.duration > 0:
        raise ConfigError("sim.duration must be positive", p, _locate(text, "sim", "duration"))

    h = doc.get("hover", {})
    cfg.hover = HoverSettings(
        joint_deg=float(h.get("joint_deg", math.degrees(sc.HOVER_JOINT))),
        spinup_thrust=float(h.get("spinup_thrust", sc.SPINUP_THRUST)),
        thrust_levels=tuple(float(x) for x in h.get("thrust_levels", sc.HOVER_THRUST_LEVELS)),
        phase_duration=float(h.get("phase_duration", sc.HOVER_PHASE_DURATION)),
    )
    c = doc.get("cruise", {})
    cfg.cruise = CruiseSettings(
        base_thrust=float(c.get("base_thrust", sc.CRUISE_BASE_THRUST)),
        altitude=float(c.get("altitude", sc.CRUISE_ALTITUDE)),
        roll_step_deg=float(c.get("roll_step_deg", 1.0)),
    )
    return cfg


def load_scenario(path, cfg: SimConfig, airframe: Airframe, polars: AirfoilPolars) -> sc.Scenario:
    """Read a scenario file: ``[scenario]`` plus ``[[schedule]]`` entries.

    ``initial`` selects the starting state: ``"trim"`` (steady glide, thrust
    from the first schedule entry), ``"hover"`` (nose up, resting on the
    ground) or ``"state"`` (explicit ``position``, ``euler_deg``,
    ``velocity`` and ``rates``; velocity and rates in the body frame).
    """
    path = Path(path)
    doc, text = read_toml(path)
    p = str(path)
    validate(doc, SCENARIO_SECTIONS, text, p)
    head = doc.get("scenario")
    if head is None:
        raise ConfigError("missing [scenario] table", p)
    rows = doc.get("schedule")
    if not rows:
        raise ConfigError("missing [[schedule]] entries", p)
    for req in ("name", "duration"):
        if req not in head:
            raise ConfigError(f"[scenario] missing {req!r}", p, _locate(text, "scenario"))

    ids = {t.side: t.id for t in airframe.thrusters}
    entries = []
    for k, r in enumerate(rows):
        if "t" not in r:
            raise ConfigError("[[schedule]] entry missing 't'", p, _locate(text, "schedule", None, k))
        thrusts = {ids[Side.PORT]: float(r.get("thrust_p", 0.0)), ids[Side.STARBOARD]: float(r.get("thrust_s", 0.0))}
        try:
            act = ActuationInput(math.radians(r.get("eps_p_deg", 0.0)), math.radians(r.get("eps_s_deg", 0.0)), thrusts)
        except ValueError as exc:
            raise ConfigError(str(exc), p, _locate(text, "schedule", None, k)) from None
        entries.append((float(r["t"]), act))
    try:
        schedule = sc.Schedule(tuple(entries))
    except ValueError as exc:
        raise ConfigError(str(exc), p, _locate(text, "schedule")) from None

    initial = head.get("initial", "state")
    env = cfg.environment
    inertia_eps = None
    if initial == "trim":
        first = entries[0][1]
        t0 = first.thrust(ids[Side.PORT])
        if first.thrust(ids[Side.STARBOARD]) != t0:
            raise ConfigError("trim start needs equal thrusts in the first schedule entry", p, _locate(text, "schedule"))
        state, _ = sc.trim_glide(airframe, polars, env, thrust=t0, altitude=cfg.cruise.altitude)
    elif initial == "hover":
        state = sc.hover_initial_state(airframe.mass.m_uav, env)
        inertia_eps = math.radians(cfg.hover.joint_deg)
    elif initial == "state":
        phi, theta, psi = (math.radians(x) for x in head.get("euler_deg", [0.0, 0.0, 0.0]))
        state = RigidBodyState(
            p=head.get("position", [0.0, 0.0, 0.0]),
            q_att=quat_from_euler(phi, theta, psi),
            v=head.get("velocity", [0.0, 0.0, 0.0]),
            w=head.get("rates", [0.0, 0.0, 0.0]),
        )
    else:
        raise ConfigError(
            f"scenario.initial must be 'trim', 'hover' or 'state', got {initial!r}", p, _locate(text, "scenario", "initial")
        )
    if "inertia_joint_deg" in head:
        inertia_eps = math.radians(head["inertia_joint_deg"])
    try:
        return sc.Scenario(
            name=head["name"],
            initial_state=state,
            schedule=schedule,
            duration=float(head["duration"]),
            ground_contact_enabled=head.get("ground_contact", True),
            airfoil_mode_override=head.get("airfoil_mode"),
            inertia_epsilon=inertia_eps,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), p, _locate(text, "scenario")) from None
