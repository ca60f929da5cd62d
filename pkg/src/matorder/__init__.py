"""Numerical toolkit for finite-dimensional matricial order operator spaces."""

__version__ = "0.1.0"
