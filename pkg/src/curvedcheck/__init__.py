"""Curvature laboratory for pseudo-Riemannian metrics."""

__version__ = "0.1.0"
