"""Numerical toolkit for the sl2 Knizhnik-Zamolodchikov circle of ideas."""

__version__ = "0.1.0"
