"""Derive the weight-balancing hover thrust for the configured vehicle.

At a fixed joint angle the quasi-steady spin rate is the one where
aerodynamic drag cancels the thrust couple; the hover thrust is the one whose
quasi-steady spin carries the weight at zero climb rate. Also prints the lift
margin around that point so the stability of the balance can be judged.
"""

import argparse
import math
from pathlib import Path

from metamorph.config import load_config
from metamorph.scenario import hover_lift_margin, hover_spin_rate, hover_thrust

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=str(Path(__file__).resolve().parents[1] / "configs" / "metamorpher.toml"))
    args = parser.parse_args()

    cfg = load_config(args.config)
    airframe, polars, env = cfg.airframe(), cfg.polars(), cfg.environment
    joint = math.radians(cfg.hover.joint_deg)
    t_hover = hover_thrust(airframe, polars, env, joint)
    print(f"hover thrust per thruster: {t_hover:.4f} N at joint {cfg.hover.joint_deg:g} deg")
    print(f"spin rate at hover:        {hover_spin_rate(airframe, polars, env, t_hover, joint):.2f} rad/s")
    print("\nthrust [N]  climb [m/s]  spin [rad/s]  net up-force [N]")
    for thrust in dict.fromkeys((cfg.hover.spinup_thrust, *cfg.hover.thrust_levels)):
        for climb in (-0.5, 0.0, 0.5, 1.0):
            spin = hover_spin_rate(airframe, polars, env, thrust, joint, climb)
            margin = hover_lift_margin(airframe, polars, env, thrust, joint, climb)
            print(f"{thrust:10.3f}  {climb:11.2f}  {spin:12.2f}  {margin:16.3f}")
