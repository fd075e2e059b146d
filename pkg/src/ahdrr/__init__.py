"""Dimension-rank ratio, positivity in K^0 of sphere products, and comparison properties of AH models."""

__version__ = "0.1.0"
