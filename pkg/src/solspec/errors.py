"""Exception hierarchy shared across the package.

The CLI maps ValidationError to exit code 2 and ResourceError (which
includes ConvergenceError) to exit code 3.
"""


class SolspecError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SolspecError, ValueError):
    """Bad user input: invalid matrix, metric, flag, or argument range."""


class ResourceError(SolspecError, RuntimeError):
    """A computation would exceed an implementation bound."""


class ConvergenceError(ResourceError):
    """An iterative solver did not converge within its refinement budget."""
