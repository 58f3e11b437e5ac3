"""Finite-structure workbench for positive model theory."""

__version__ = "0.1.0"
