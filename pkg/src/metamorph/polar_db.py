"""Airfoil polar ingestion and coefficient lookup.

Polars are read from XFLR5 text exports (one file per Reynolds number) and
served as a surface over (Re, alpha). Angles are stored in degrees exactly as
written in the files; the radian arrays used for every lookup are built once,
when a :class:`PolarCurve` is constructed.

Outside the tabulated alpha range the coefficients blend linearly, over a 5
degree band, into a flat-plate model so that the full [-pi, pi] range needed
by a spinning wing is covered.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

BLEND_BAND = math.radians(5.0)
DEFAULT_CD0 = 0.02

_RE_HEADER = re.compile(r"\bRe\s*=\s*([-+]?\d*\.?\d+)\s*e\s*([-+]?\d+)")
_REQUIRED = ("alpha", "CL", "CD", "Cm")


class PolarError(Exception):
    """Base class for polar parsing and lookup failures."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.message = message


class MissingReynoldsHeader(PolarError):
    pass


class MissingColumn(PolarError):
    def __init__(self, name: str, path: str | None = None, line: int | None = None):
        self.name = name
        super().__init__(f"missing column {name!r}", path, line)


class NonMonotonicAlpha(PolarError):
    pass


class EmptyPolar(PolarError):
    pass


class MalformedRow(PolarError):
    pass


class EmptySurface(PolarError):
    pass


@dataclass(frozen=True)
class PolarPoint:
    alpha: float  # degrees, as stored
    c_l: float
    c_d: float
    c_m: float


@dataclass(frozen=True)
class PolarCurve:
    reynolds: float
    points: tuple[PolarPoint, ...]
    rejected_lines: tuple[int, ...] = field(default=(), compare=False)

    alpha_rad: np.ndarray = field(init=False, repr=False, compare=False)
    table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(self.points)
        if len(pts) < 3:
            raise EmptyPolar(f"polar at Re={self.reynolds:g} has {len(pts)} points, need >= 3")
        if not self.reynolds > 0:
            raise PolarError(f"Reynolds number must be positive, got {self.reynolds}")
        alpha_deg = np.array([p.alpha for p in pts])
        if np.any(np.diff(alpha_deg) <= 0):
            raise NonMonotonicAlpha("alpha values must be strictly increasing")
        table = np.array([[p.c_l, p.c_d, p.c_m] for p in pts])
        if not np.all(np.isfinite(table)) or not np.all(np.isfinite(alpha_deg)):
            raise PolarError("non-finite coefficient in polar")
        if np.any(table[:, 1] <= 0):
            raise PolarError("drag coefficient must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "alpha_rad", np.radians(alpha_deg))
        object.__setattr__(self, "table", table)

    @property
    def alpha_min(self) -> float:
        return float(self.alpha_rad[0])

    @property
    def alpha_max(self) -> float:
        return float(self.alpha_rad[-1])

    def coeffs(self, alpha, c_d0: float = DEFAULT_CD0):
        """(c_l, c_d, c_m) arrays at ``alpha`` [rad], with the flat-plate blend."""
        alpha = np.asarray(alpha, dtype=float)
        out = [np.interp(alpha, self.alpha_rad, self.table[:, j]) for j in range(3)]
        if alpha.size and (alpha.min() < self.alpha_min or alpha.max() > self.alpha_max):
            w_hi = np.clip((alpha - self.alpha_max) / BLEND_BAND, 0.0, 1.0)
            w_lo = np.clip((self.alpha_min - alpha) / BLEND_BAND, 0.0, 1.0)
            w = np.maximum(w_hi, w_lo)
            fp = flat_plate_coeffs(alpha, c_d0)
            out = [np.where(w > 0, (1.0 - w) * t + w * f, t) for t, f in zip(out, fp)]
        return out


@dataclass(frozen=True)
class PolarSurface:
    airfoil_name: str
    curves: tuple[PolarCurve, ...]
    flat_plate_cd0: float = DEFAULT_CD0

    log_re: np.ndarray = field(init=False, repr=False, compare=False)
    shared_alpha: np.ndarray | None = field(init=False, repr=False, compare=False)
    stacked: np.ndarray | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        curves = tuple(sorted(self.curves, key=lambda c: c.reynolds))
        res = [c.reynolds for c in curves]
        if len(set(res)) != len(res):
            raise PolarError(f"duplicate Reynolds numbers in surface {self.airfoil_name!r}")
        object.__setattr__(self, "curves", curves)
        object.__setattr__(self, "log_re", np.log(np.array(res, dtype=float)))
        # curves tabulated on one alpha grid allow a single gather instead of a loop
        shared = curves and all(np.array_equal(c.alpha_rad, curves[0].alpha_rad) for c in curves)
        object.__setattr__(self, "shared_alpha", curves[0].alpha_rad if shared else None)
        object.__setattr__(self, "stacked", np.stack([c.table for c in curves]) if shared else None)

    @property
    def reynolds(self) -> list[float]:
        return [c.reynolds for c in self.curves]


def flat_plate_coeffs(alpha, c_d0: float = DEFAULT_CD0):
    """Flat-plate (c_l, c_d, c_m) valid over the full [-pi, pi] range."""
    s = np.sin(alpha)
    c_l = 2.0 * s * np.cos(alpha)
    c_d = c_d0 + 2.0 * s * s
    c_n = 2.0 * s
    x_cp = 0.25 + 0.25 * np.abs(s)
    c_m = -c_n * (x_cp - 0.25)
    if np.ndim(alpha) == 0:
        return float(c_l), float(c_d), float(c_m)
    return c_l, c_d, c_m


def lookup_coeffs(surface: PolarSurface, reynolds, alpha):
    """Interpolated (c_l, c_d, c_m) at ``reynolds`` and ``alpha`` [rad].

    Linear in alpha along each curve and linear in log(Re) between the two
    bracketing curves; Re outside the tabulated family is clamped to the
    nearest curve. Accepts scalars or equally-shaped arrays.
    """
    if not surface.curves:
        raise EmptySurface(f"polar surface {surface.airfoil_name!r} has no curves")
    scalar = np.ndim(reynolds) == 0 and np.ndim(alpha) == 0
    re = np.atleast_1d(np.asarray(reynolds, dtype=float))
    al = np.atleast_1d(np.asarray(alpha, dtype=float))
    if re.shape != al.shape:
        re, al = np.broadcast_arrays(re, al)
    cd0 = surface.flat_plate_cd0

    n = len(surface.curves)
    if surface.shared_alpha is not None and n > 1 and al.size:
        res = _lookup_shared(surface, np.maximum(re.ravel(), 1e-300), al.ravel())
    elif n == 1:
        res = surface.curves[0].coeffs(al.ravel(), cd0)
    else:
        flat_al = al.ravel()
        lr = np.log(np.maximum(re.ravel(), 1e-300))
        lr = np.clip(lr, surface.log_re[0], surface.log_re[-1])
        hi = np.clip(np.searchsorted(surface.log_re, lr, side="left"), 1, n - 1)
        lo = hi - 1
        t = (lr - surface.log_re[lo]) / (surface.log_re[hi] - surface.log_re[lo])
        res = np.empty((3, flat_al.size))
        for k in np.unique(lo):
            sel = lo == k
            a = surface.curves[k].coeffs(flat_al[sel], cd0)
            b = surface.curves[k + 1].coeffs(flat_al[sel], cd0)
            ts = t[sel]
            for j in range(3):
                res[j, sel] = (1.0 - ts) * a[j] + ts * b[j]
    if scalar:
        return tuple(float(r[0]) for r in res)
    return tuple(np.asarray(r).reshape(re.shape) for r in res)


def _lookup_shared(surface: PolarSurface, re: np.ndarray, al: np.ndarray):
    x = surface.shared_alpha
    log_re = surface.log_re
    flat = surface.stacked.reshape(-1, 3)
    m = len(x)
    j = np.searchsorted(x, al, side="right") - 1
    np.minimum(np.maximum(j, 0, out=j), m - 2, out=j)
    f = ((np.minimum(np.maximum(al, x[0]), x[-1]) - x[j]) / (x[j + 1] - x[j]))[:, None]
    lr = np.minimum(np.maximum(np.log(re), log_re[0]), log_re[-1])
    hi = np.searchsorted(log_re, lr, side="left")
    np.minimum(np.maximum(hi, 1, out=hi), len(log_re) - 1, out=hi)
    lo = hi - 1
    t = ((lr - log_re[lo]) / (log_re[hi] - log_re[lo]))[:, None]
    k_lo = lo * m + j
    k_hi = hi * m + j
    g = flat[np.concatenate((k_lo, k_lo + 1, k_hi, k_hi + 1))].reshape(4, -1, 3)
    a = (1.0 - f) * g[0] + f * g[1]
    b = (1.0 - f) * g[2] + f * g[3]
    out = (1.0 - t) * a + t * b
    if al.min() < x[0] or al.max() > x[-1]:
        w = np.maximum(
            np.clip((al - x[-1]) / BLEND_BAND, 0.0, 1.0), np.clip((x[0] - al) / BLEND_BAND, 0.0, 1.0)
        )[:, None]
        fp = np.column_stack(flat_plate_coeffs(al, surface.flat_plate_cd0))
        out = np.where(w > 0, (1.0 - w) * out + w * fp, out)
    return out.T


def parse_polar_file(text, path: str | None = None) -> PolarCurve:
    """Parse an XFLR5 text polar export.

    Columns are selected by header name, so files with extra columns (CDp,
    transition points, ...) in any order are accepted. Rows containing
    non-finite values or a non-positive drag coefficient are skipped and
    reported in ``rejected_lines``.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    lines = text.splitlines()

    reynolds = None
    header_idx = None
    for i, line in enumerate(lines):
        m = _RE_HEADER.search(line)
        if m and reynolds is None:
            reynolds = float(f"{m.group(1)}e{int(m.group(2))}")  # correctly rounded
        tokens = line.split()
        if tokens and tokens[0] == "alpha":
            header_idx = i
            break
    if reynolds is None:
        raise MissingReynoldsHeader("no 'Re = <mantissa> e <exponent>' header line", path)
    if header_idx is None:
        raise MissingColumn("alpha", path)

    names = lines[header_idx].split()
    cols = {}
    for name in _REQUIRED:
        if name not in names:
            raise MissingColumn(name, path, header_idx + 1)
        cols[name] = names.index(name)
    width = max(cols.values()) + 1

    points = []
    rejected = []
    for lineno, line in enumerate(lines[header_idx + 1 :], start=header_idx + 2):
        stripped = line.strip()
        if not stripped or set(stripped) <= set("- "):
            continue
        tokens = stripped.split()
        if len(tokens) < width:
            raise MalformedRow(f"expected at least {width} columns, got {len(tokens)}", path, lineno)
        try:
            vals = [float(tokens[cols[name]]) for name in _REQUIRED]
        except ValueError:
            raise MalformedRow(f"non-numeric value in row {stripped!r}", path, lineno) from None
        if not all(math.isfinite(v) for v in vals) or vals[2] <= 0:
            rejected.append(lineno)
            continue
        points.append(PolarPoint(*vals))

    if not points:
        raise EmptyPolar("no data rows", path)
    points.sort(key=lambda p: p.alpha)
    for a, b in zip(points, points[1:]):
        if b.alpha <= a.alpha:
            raise NonMonotonicAlpha(f"duplicate alpha {b.alpha:g} deg", path)
    try:
        return PolarCurve(reynolds, tuple(points), tuple(rejected))
    except PolarError as exc:
        raise type(exc)(exc.message, path) from None


def format_polar(curve: PolarCurve, airfoil_name: str = "airfoil") -> str:
    """Serialize a curve in the XFLR5 layout; values are written round-trip exact."""
    mant, _, exp = repr(float(curve.reynolds)).partition("e")
    out = [
        "xflr5 v6.61",
        "",
        f" Calculated polar for: {airfoil_name}",
        "",
        " 1 1 Reynolds number fixed          Mach number fixed",
        "",
        " xtrf =   1.000 (top)        1.000 (bottom)",
        f" Mach =   0.000     Re = {mant} e {int(exp or 0)}     Ncrit =   9.000",
        "",
        "  alpha      CL        CD       CDp       Cm",
        " ------- -------- --------- --------- --------",
    ]
    for p in curve.points:
        out.append(f" {p.alpha!r}  {p.c_l!r}  {p.c_d!r}  0.0  {p.c_m!r}")
    return "\n".join(out) + "\n"


def load_surface(directory, airfoil_name: str | None = None, c_d0: float = DEFAULT_CD0) -> PolarSurface:
    """Build a surface from every ``*.txt`` file under ``directory``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise PolarError("polar directory does not exist", str(directory))
    files = sorted(directory.glob("*.txt"))
    if not files:
        raise EmptySurface("no *.txt polar files found", str(directory))
    curves = [parse_polar_file(f.read_bytes(), str(f)) for f in files]
    return PolarSurface(airfoil_name or directory.name, tuple(curves), c_d0)


def curves_from(points_by_re: Iterable[tuple[float, Iterable[tuple[float, float, float, float]]]]):
    """Convenience constructor: ``[(Re, [(alpha_deg, cl, cd, cm), ...]), ...]``."""
    return tuple(PolarCurve(re, tuple(PolarPoint(*p) for p in pts)) for re, pts in points_by_re)
