"""Synthetic stand-in polars written in the XFLR5 export layout.

The simulator consumes polars exported from XFLR5. When no exports are at
hand (tests, fresh checkouts) this module writes a plausible low-Reynolds
family instead: a thin-airfoil lift line that blends into flat-plate
behaviour past stall, a parabolic drag bucket whose floor falls with Re, and
a constant moment coefficient below stall.

Two parameter sets are provided. ``REFLEX_CRUISE`` is a mildly cambered
section with a small nose-up moment, which a tailless wing needs to trim
with a stable static margin; it is written under the ``E387`` name used by
the default configuration. ``SYMMETRIC_HOVER`` stands in for the NACA 0010.
Drop real XFLR5 exports into the same directories to replace them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .polar_db import flat_plate_coeffs

REYNOLDS_GRID = (2e4, 5e4, 1e5, 2e5, 4e5, 1e6)
ALPHA_GRID_DEG = np.round(np.arange(-20.0, 20.0 + 1e-9, 0.5), 3)


@dataclass(frozen=True)
class SectionModel:
    name: str
    alpha_zero_deg: float
    c_m0: float
    stall_deg: float
    symmetric: bool

    def lift_slope(self, re: float) -> float:
        return 2.0 * math.pi * min(0.95, 0.80 + 0.05 * math.log10(re / 2e4))

    def stall(self, re: float) -> float:
        return math.radians(self.stall_deg + 1.5 * math.log10(re / 2e4))

    def c_d0(self, re: float) -> float:
        return 0.007 + 2.5 / math.sqrt(re)

    def coefficients(self, alpha_deg: float, re: float) -> tuple[float, float, float]:
        a = math.radians(alpha_deg)
        a0 = math.radians(self.alpha_zero_deg)
        cl_lin = self.lift_slope(re) * (a - a0)
        sigma = 1.0 / (1.0 + math.exp(-(abs(a - a0) - self.stall(re)) / math.radians(1.2)))
        cl_fp, cd_fp, cm_fp = flat_plate_coeffs(a, 0.02)
        cl = (1.0 - sigma) * cl_lin + sigma * cl_fp
        cd = (1.0 - sigma) * (self.c_d0(re) + 0.012 * cl_lin**2) + sigma * cd_fp
        cm = (1.0 - sigma) * self.c_m0 + sigma * cm_fp
        return cl, cd, cm


REFLEX_CRUISE = SectionModel("E387", alpha_zero_deg=-2.0, c_m0=0.02, stall_deg=11.0, symmetric=False)
SYMMETRIC_HOVER = SectionModel("NACA0010", alpha_zero_deg=0.0, c_m0=0.0, stall_deg=14.0, symmetric=True)


def polar_rows(model: SectionModel, re: float, alphas=ALPHA_GRID_DEG) -> list[tuple[float, float, float, float]]:
    """Rows of (alpha_deg, CL, CD, Cm) rounded to XFLR5 output precision."""
    rows = {}
    for a in alphas:
        a = float(a)
        if model.symmetric and a < 0:
            continue
        cl, cd, cm = model.coefficients(a, re)
        rows[a] = (round(cl, 4), round(cd, 5), round(cm, 4))
        if model.symmetric and a > 0:
            rows[-a] = (-rows[a][0], rows[a][1], -rows[a][2])
    return [(a, *rows[a]) for a in sorted(rows)]


def polar_text(model: SectionModel, re: float) -> str:
    lines = [
        "xflr5 v6.61",
        "",
        f" Calculated polar for: {model.name}",
        "",
        " 1 1 Reynolds number fixed          Mach number fixed",
        "",
        " xtrf =   1.000 (top)        1.000 (bottom)",
        f" Mach =   0.000     Re =     {re / 1e6:.3f} e 6     Ncrit =   9.000",
        "",
        "  alpha      CL        CD       CDp       Cm    Top Xtr  Bot Xtr",
        " ------- -------- --------- --------- -------- -------- --------",
    ]
    for a, cl, cd, cm in polar_rows(model, re):
        cdp = round(0.6 * cd, 5)
        lines.append(f" {a:7.3f} {cl:8.4f} {cd:9.5f} {cdp:9.5f} {cm:8.4f}   1.0000   1.0000")
    return "\n".join(lines) + "\n"


def write_polar_set(root, models=(REFLEX_CRUISE, SYMMETRIC_HOVER), reynolds=REYNOLDS_GRID) -> list[Path]:
    """Write ``root/<airfoil>/<airfoil>_Re<...>.txt`` for each model and Re."""
    written = []
    for model in models:
        d = Path(root) / model.name
        d.mkdir(parents=True, exist_ok=True)
        for re in reynolds:
            f = d / f"{model.name}_Re{re / 1e6:.3f}.txt"
            f.write_text(polar_text(model, re))
            written.append(f)
    return written
