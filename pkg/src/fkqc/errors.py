"""Exception types shared across the package."""


class DomainError(ValueError):
    """Invalid input for an operation (bad rule, bad counts, bad window)."""


class RangeError(ValueError):
    """A query left the region covered by the constructed data."""


class ConvergenceError(RuntimeError):
    """Solver failed to converge; carries the best candidate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ApproximationError(RuntimeError):
    """Target value not reachable within the allowed refinement depth."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
