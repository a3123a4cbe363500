"""Aerodynamic loads at the trimmed glide for increasing segment counts.

The glide is trimmed once at 8 segments per side; that state is then
re-evaluated with every discretization, so differences come from the strip
model alone. Relative differences are against the 8-segment loads for
components above 1e-6.
"""

import argparse
from pathlib import Path

import numpy as np

from metamorph.aero import total_aero_loads
from metamorph.config import load_config
from metamorph.scenario import trim_glide

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=str(Path(__file__).resolve().parents[1] / "configs" / "metamorpher.toml"))
    parser.add_argument("--counts", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64])
    args = parser.parse_args()

    cfg = load_config(args.config)
    polars, env = cfg.polars(), cfg.environment
    state, act = trim_glide(cfg.airframe(8), polars, env)
    rows = {}
    for n in sorted(set(args.counts) | {8}):
        loads = total_aero_loads(state, cfg.airframe(n), act, polars, env)
        rows[n] = np.concatenate((loads.force, loads.moment))
    ref = rows[8]
    big = np.abs(ref) > 1e-6
    print("n/side       Fx [N]      Fz [N]    My [N m]   max rel. diff vs 8")
    for n, r in rows.items():
        rel = np.max(np.abs(r[big] - ref[big]) / np.abs(ref[big]))
        print(f"{n:6d}  {r[0]:10.5f}  {r[2]:10.5f}  {r[4]:10.6f}  {rel:10.3%}")
