"""Steklov eigenproblems on analytic planar domains."""

__version__ = "0.1.0"
