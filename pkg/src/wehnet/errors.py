"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain where a function is defined."""


class ConfigError(ValueError):
    """A configuration violates one of its invariants."""


class ConvergenceError(ArithmeticError):
    """A numerical procedure did not reach its requested accuracy.

    ``estimate`` and ``error_bound`` carry the best value found and the
    achieved error estimate.
    """

    def __init__(self, message, estimate=float("nan"), error_bound=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class OptimizationError(ArithmeticError):
    """A maximizer could not bracket an interior optimum."""
