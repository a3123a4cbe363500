import math
import sys
from pathlib import Path

import numpy as np
import pytest

from metamorph.aero import AirfoilPolars
from metamorph.config import load_config
from metamorph.environment import Environment
from metamorph.polar_db import PolarSurface, curves_from

ROOT = Path(__file__).resolve().parents[1]
CONFIG = ROOT / "configs" / "metamorpher.toml"


@pytest.fixture(scope="session")
def cfg():
    return load_config(CONFIG)


@pytest.fixture(scope="session")
def airframe(cfg):
    return cfg.airframe()


@pytest.fixture(scope="session")
def polars(cfg):
    return cfg.polars()


@pytest.fixture(scope="session")
def env(cfg):
    return cfg.environment


def symmetric_rows(slope=0.1, cd0=0.01, k=0.001, alphas=range(0, 13)):
    """Exactly antisymmetric (alpha_deg, cl, cd, cm) rows over [-12, 12] deg."""
    rows = {}
    for a in alphas:
        a = float(a)
        cl, cd, cm = slope * a, cd0 + k * a * a, -0.002 * a
        rows[a] = (cl, cd, cm)
        rows[-a] = (-cl, cd, -cm)
    return [(a, *rows[a]) for a in sorted(rows)]


@pytest.fixture(scope="session")
def symmetric_surface():
    return PolarSurface("SYM", curves_from([(5e4, symmetric_rows(0.09)), (2e5, symmetric_rows(0.1, 0.008))]))


@pytest.fixture(scope="session")
def symmetric_polars(symmetric_surface):
    return AirfoilPolars(symmetric_surface, symmetric_surface)


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        title, ok, detail = results[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
