"""6-DoF flight simulation of a morphing flying-wing UAV with strip-theory aerodynamics."""

__version__ = "0.1.0"
