"""Command-line front end: run scenarios, validate polars, emit plot scripts, trim.

Errors are reported on stderr as one JSON object. Exit status 2 means bad
input (configuration, polars, missing telemetry); 3 means the integration
diverged; 1 is reserved for ``validate-polar`` finding bad files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, SimConfig, load_config, load_scenario
from .dynamics import SimulationDiverged
from .polar_db import EmptySurface, PolarError, parse_polar_file
from .scenario import BUILTINS, SEGMENT_COLUMNS, VEHICLE_COLUMNS, TrimNotConverged, run, trim_glide

EXIT_OK = 0
EXIT_BAD_FILES = 1
EXIT_INPUT = 2
EXIT_DIVERGED = 3


class MissingTelemetry(FileNotFoundError):
    pass


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _error(kind: str, message: str, **extra) -> None:
    payload = {"error": kind, "message": message}
    payload.update({k: v for k, v in extra.items() if v is not None})
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


# ---------------------------------------------------------------------------
# run


def polar_hashes(cfg: SimConfig) -> dict:
    root = cfg.resolve_polar_dir()
    out = {}
    for name in (cfg.wing.airfoil_cruise, cfg.wing.airfoil_hover):
        for f in sorted((root / name).glob("*.txt")):
            out[f"{name}/{f.name}"] = _sha256(f.read_bytes())
    return out


def _build(cfg: SimConfig, scenario_ref: str, segments: int | None):
    airframe = cfg.airframe(segments)
    polars = cfg.polars()
    if scenario_ref in BUILTINS:
        scenario = cfg.builtin(scenario_ref, airframe, polars)
    else:
        path = Path(scenario_ref)
        if not path.exists():
            raise ConfigError(f"unknown scenario {scenario_ref!r}: not a built-in ({', '.join(BUILTINS)}) nor a file")
        scenario = load_scenario(path, cfg, airframe, polars)
    return airframe, polars, scenario


def run_one(config_path: str, scenario_ref: str, out_dir: str, dt: float | None = None, segments: int | None = None) -> dict:
    """Run one scenario and write ``vehicle.csv``, ``segments.csv`` and ``run_manifest.json``.

    Raises the underlying error on failure; partial telemetry is still written
    when the integration diverges.
    """
    cfg = load_config(config_path)
    dt = cfg.sim.dt if dt is None else dt
    airframe, polars, scenario = _build(cfg, scenario_ref, segments)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    diverged = None
    try:
        tel = run(scenario, airframe, polars, cfg.environment, dt, cfg.sim.output_every)
    except SimulationDiverged as exc:
        diverged = exc
        tel = getattr(exc, "telemetry", None)
    wall = time.perf_counter() - start
    if tel is not None:
        (out / "vehicle.csv").write_text(tel.vehicle_csv())
        (out / "segments.csv").write_text(tel.segments_csv())
    manifest = {
        "scenario": scenario.name,
        "config": str(config_path),
        "config_sha256": _sha256(Path(config_path).read_bytes()),
        "polar_sha256": polar_hashes(cfg),
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "dt": dt,
        "output_every": cfg.sim.output_every,
        "segments_per_side": airframe.wing.segments_per_side,
        "duration": scenario.duration,
        "wall_time_s": round(wall, 3),
        "status": "diverged" if diverged else "ok",
    }
    if scenario_ref not in BUILTINS:
        manifest["scenario_sha256"] = _sha256(Path(scenario_ref).read_bytes())
    (out / "run_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if diverged is not None:
        raise diverged
    return manifest


def _run_job(args):
    config, ref, out, dt, segments = args
    try:
        return ref, run_one(config, ref, out, dt, segments), None
    except SimulationDiverged as exc:
        return ref, None, ("SimulationDiverged", str(exc), exc.diagnostics())
    except (ConfigError, PolarError) as exc:
        return ref, None, (type(exc).__name__, str(exc), None)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    refs = args.scenario or list(BUILTINS)
    base = Path(args.out or (cfg.source.parent / cfg.sim.out_dir))
    jobs = []
    for ref in refs:
        name = ref if ref in BUILTINS else Path(ref).stem
        out = base if len(refs) == 1 else base / name
        jobs.append((str(args.config), ref, str(out), args.dt, args.segments))
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    status = EXIT_OK
    for ref, manifest, err in results:
        if err is None:
            print(f"{ref}: ok ({manifest['wall_time_s']} s) -> {jobs[refs.index(ref)][2]}")
            continue
        kind, message, diag = err
        if kind == "SimulationDiverged":
            _error(kind, message, scenario=ref, diagnostics=diag)
            status = max(status, EXIT_DIVERGED)
        else:
            _error(kind, message, scenario=ref)
            status = max(status, EXIT_INPUT)
    return status


# ---------------------------------------------------------------------------
# validate-polar


def cmd_validate_polar(args) -> int:
    root = Path(args.dir)
    if not root.is_dir():
        _error("PolarError", "polar directory does not exist", path=str(root))
        return EXIT_INPUT
    files = sorted(root.rglob("*.txt"))
    if not files:
        _error(EmptySurface.__name__, "no *.txt polar files found", path=str(root))
        return EXIT_BAD_FILES
    bad = 0
    for f in files:
        try:
            curve = parse_polar_file(f.read_bytes(), str(f))
        except PolarError as exc:
            bad += 1
            print(f"ERROR {f}: {type(exc).__name__}: {exc.message}" + (f" (line {exc.line})" if exc.line else ""))
            continue
        a = [p.alpha for p in curve.points]
        rej = ",".join(str(n) for n in curve.rejected_lines) or "-"
        print(f"OK    {f}: Re={curve.reynolds:.6g} alpha=[{a[0]:g}, {a[-1]:g}] deg points={len(a)} rejected={rej}")
    print(f"{len(files) - bad}/{len(files)} files OK")
    return EXIT_BAD_FILES if bad else EXIT_OK


# ---------------------------------------------------------------------------
# plot


def _read_header(path: Path) -> list[str]:
    if not path.exists():
        raise MissingTelemetry(f"missing telemetry file {path}")
    with path.open(newline="") as fh:
        return next(csv.reader(fh), [])


def segment_ids(path: Path) -> list[tuple[str, int]]:
    """Distinct (side, index) pairs of ``segments.csv`` in file order."""
    seen = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        first_t = None
        for row in reader:
            if first_t is None:
                first_t = row[0]
            if row[0] != first_t:
                break
            seen.append((row[1], int(row[2])))
    return seen


VEHICLE_PANELS = (
    ("Body rates [rad/s]", ("wx", "wy", "wz")),
    ("Attitude [rad]", ("phi", "theta", "psi")),
    ("Position [m]", ("px", "py", "pz")),
    ("Body velocity [m/s]", ("vx", "vy", "vz")),
    ("Force [N]", ("Fx", "Fy", "Fz")),
    ("Moment [N m]", ("Mx", "My", "Mz")),
)
SEGMENT_PANELS = (("Fx", "F_x [N]"), ("Fz", "F_z [N]"), ("alpha_eff", "alpha_eff [rad]"))


def vehicle_script(title: str) -> str:
    col = {name: i + 1 for i, name in enumerate(VEHICLE_COLUMNS)}
    lines = [
        f"# {title}: vehicle-level telemetry, body frame",
        "set datafile separator ','",
        "set terminal pngcairo size 1200,1400",
        "set output 'vehicle.png'",
        "set key outside right",
        "set grid",
        f"set multiplot layout {len(VEHICLE_PANELS)},1 title '{title}'",
    ]
    for label, names in VEHICLE_PANELS:
        series = ", ".join(f"'vehicle.csv' using 1:{col[n]} skip 1 with lines title '{n}'" for n in names)
        lines += [f"set ylabel '{label}'", f"plot {series}"]
    lines += ["set xlabel 't [s]'", "unset multiplot", ""]
    return "\n".join(lines)


def segments_script(title: str, ids: list[tuple[str, int]]) -> str:
    """One panel per quantity, every segment a series, coloured root (dark) to tip (light)."""
    col = {name: i + 1 for i, name in enumerate(SEGMENT_COLUMNS)}
    n_side = max(idx for _, idx in ids)
    lines = [
        f"# {title}: per-segment telemetry ({len(ids)} series per panel)",
        "set datafile separator ','",
        "set terminal pngcairo size 1200,1200",
        "set output 'segments.png'",
        "set key outside right",
        "set grid",
        f"set multiplot layout {len(SEGMENT_PANELS)},1 title '{title}'",
    ]
    for qty, label in SEGMENT_PANELS:
        series = []
        for side, idx in ids:
            shade = int(40 + 180 * (idx - 1) / max(n_side - 1, 1))
            rgb = f"#{shade:02x}{shade // 2:02x}ff" if side == "P" else f"#ff{shade // 2:02x}{shade:02x}"
            series.append(
                f"'segments.csv' using 1:((strcol(2) eq '{side}' && $3 == {idx}) ? ${col[qty]} : NaN) skip 1 "
                f"with lines lc rgb '{rgb}' title '{side}{idx}'"
            )
        lines += [f"set ylabel '{label}'", "plot " + ", \\\n     ".join(series)]
    lines += ["set xlabel 't [s]'", "unset multiplot", ""]
    return "\n".join(lines)


def cmd_plot(args) -> int:
    out = Path(args.dir)
    vehicle, segments = out / "vehicle.csv", out / "segments.csv"
    header_v, header_s = _read_header(vehicle), _read_header(segments)
    if tuple(header_v) != VEHICLE_COLUMNS or tuple(header_s) != SEGMENT_COLUMNS:
        raise MissingTelemetry(f"unexpected telemetry header in {out}")
    ids = segment_ids(segments)
    if not ids:
        raise MissingTelemetry(f"no segment rows in {segments}")
    title = out.resolve().name
    manifest = out / "run_manifest.json"
    if manifest.exists():
        title = json.loads(manifest.read_text()).get("scenario", title)
    (out / "vehicle.gp").write_text(vehicle_script(title))
    (out / "segments.gp").write_text(segments_script(title, ids))
    print(f"wrote {out / 'vehicle.gp'} and {out / 'segments.gp'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# trim


def cmd_trim(args) -> int:
    cfg = load_config(args.config)
    airframe = cfg.airframe(args.segments)
    polars = cfg.polars()
    state, act = trim_glide(airframe, polars, cfg.environment, thrust=args.thrust, altitude=cfg.cruise.altitude)
    v_w = state.v_world
    gamma = math.atan2(v_w[2], math.hypot(v_w[0], v_w[1]))
    report = {
        "airspeed": float(np.linalg.norm(state.v)),
        "alpha_deg": math.degrees(math.atan2(state.v[2], state.v[0])),
        "theta_deg": math.degrees(state.euler[1]),
        "glide_angle_deg": math.degrees(gamma),
        "sink_rate": float(-v_w[2]),
        "thrust_per_thruster": args.thrust,
        "segments_per_side": airframe.wing.segments_per_side,
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metamorph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run built-in or file-defined scenarios")
    p.add_argument("config")
    p.add_argument(
        "--scenario", action="append", help=f"built-in name ({', '.join(BUILTINS)}) or scenario file; repeatable"
    )
    p.add_argument("--out", help="output directory (one sub-directory per scenario when several are run)")
    p.add_argument("--dt", type=float, help="integration step [s], overrides [sim] dt")
    p.add_argument("--segments", type=int, help="segments per wing, overrides [airframe]")
    p.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate-polar", help="parse every polar file under a directory")
    p.add_argument("dir")
    p.set_defaults(func=cmd_validate_polar)

    p = sub.add_parser("plot", help="write gnuplot scripts for the telemetry in a run directory")
    p.add_argument("dir")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("trim", help="solve the steady glide and print it as JSON")
    p.add_argument("config")
    p.add_argument("--thrust", type=float, default=0.0, help="equal thrust per thruster [N]")
    p.add_argument("--segments", type=int, help="segments per wing, overrides [airframe]")
    p.set_defaults(func=cmd_trim)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PolarError) as exc:
        _error(type(exc).__name__, getattr(exc, "message", str(exc)), file=exc.path, line=exc.line)
        return EXIT_INPUT
    except MissingTelemetry as exc:
        _error("MissingTelemetry", str(exc))
        return EXIT_INPUT
    except TrimNotConverged as exc:
        _error("TrimNotConverged", str(exc))
        return EXIT_DIVERGED
    except SimulationDiverged as exc:
        _error("SimulationDiverged", str(exc), diagnostics=exc.diagnostics())
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
