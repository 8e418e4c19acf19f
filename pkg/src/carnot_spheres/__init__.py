"""Homogeneous norms and their unit spheres on Carnot groups."""

__version__ = "0.1.0"
