"""Guaranteed spectral bounds for Hessian matrices on boxes."""

__version__ = "0.1.0"
