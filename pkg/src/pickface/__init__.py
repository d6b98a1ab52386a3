"""Numerical checks for state extensions on operator systems of multipliers."""

__version__ = "0.1.0"
