"""Atmosphere, gravity and ground-contact constants."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Environment:
    rho: float = 1.225  # [kg/m^3]
    g: float = 9.81  # [m/s^2]
    mu: float = 1.7894e-5  # dynamic viscosity [Pa s]
    wind: np.ndarray = field(default_factory=lambda: np.zeros(3))  # world frame [m/s]
    contact_height: float = 0.05  # CoM height at which contact begins [m]
    contact_stiffness: float = 500.0  # [N/m]
    contact_damping: float = 50.0  # [N s/m]
    contact_horizontal_damping: float = 5.0  # [N s/m]

    def __post_init__(self):
        object.__setattr__(self, "wind", np.asarray(self.wind, dtype=float).reshape(3))
        for name in ("rho", "g", "mu", "contact_stiffness"):
            if not getattr(self, name) > 0:
                raise ValueError(f"environment.{name} must be positive")
        for name in ("contact_height", "contact_damping", "contact_horizontal_damping"):
            if getattr(self, name) < 0:
                raise ValueError(f"environment.{name} must be non-negative")
