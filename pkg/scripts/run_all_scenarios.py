"""Run the four built-in experiments and write telemetry plus plot scripts per scenario."""

import argparse
import sys
from pathlib import Path

from metamorph.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(ROOT / "configs" / "metamorpher.toml"))
    parser.add_argument("--out", default=str(ROOT / "results"))
    parser.add_argument("--jobs", type=int, default=4)
    args = parser.parse_args()

    names = ("hover_spinup", "hover_thrust", "cruise_roll", "cruise_yaw")
    argv = ["run", args.config, "--out", args.out, "--jobs", str(args.jobs)]
    for name in names:
        argv += ["--scenario", name]
    status = main(argv)
    for name in names:
        if (Path(args.out) / name / "vehicle.csv").exists():
            main(["plot", str(Path(args.out) / name)])
    sys.exit(status)
