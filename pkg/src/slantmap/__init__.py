"""Pointwise numerical analysis of conformal slant maps between chart manifolds."""

__version__ = "0.1.0"
