"""Numerical workbench for stability of minimal cones and calibrated cones."""

__version__ = "0.1.0"
