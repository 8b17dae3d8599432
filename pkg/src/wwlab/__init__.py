"""Numerical laboratory for three-dimensional gravity-capillary water waves."""

__version__ = "0.1.0"
