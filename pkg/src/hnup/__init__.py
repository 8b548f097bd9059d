"""Cantor-like sets with variable ratios: dimension, capacity, separating
annuli, porosity and the annular packing construction."""

__version__ = "0.1.0"
