"""Spectral, dynamical, and arithmetic toolkit for torus bundles over the
circle glued by a hyperbolic unimodular integer matrix."""

__version__ = "0.1.0"

from .errors import ConvergenceError, ResourceError, SolspecError, ValidationError

__all__ = [
    "ConvergenceError",
    "ResourceError",
    "SolspecError",
    "ValidationError",
    "__version__",
]
