"""Exception and warning classes."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class GridMismatchError(ValueError):
    """Two masks or grid functions live on different grids."""


class UnsupportedDimensionError(ValueError):
    """The operation is not implemented in this dimension."""


class SolverError(RuntimeError):
    """An iterative solver failed to converge.

    ``residual`` carries the last residual norm reached.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InsufficientDataError(ValueError):
    """Not enough usable records for a fit."""


class ConnectivityWarning(UserWarning):
    """The domain has more than one connected component."""
