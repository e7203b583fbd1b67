"""Exception types shared across the package."""

__all__ = [
    "CacheCancelError",
    "ConfigError",
    "FullyCachedNetwork",
    "NumericalError",
    "SeriesConvergenceError",
    "QuadratureError",
    "SubsetCapError",
]


class CacheCancelError(Exception):
    """Base class for errors raised by this package."""


class FullyCachedNetwork(CacheCancelError):
    """Every requested packet is already cached, so no load remains.

    Raised where the uncached-request distribution is undefined because the
    caching scheme satisfies all traffic (the normalizing denominator of the
    request fractions is zero).
    """


class NumericalError(CacheCancelError):
    """A numerical routine failed to reach its accuracy target."""


class SeriesConvergenceError(NumericalError):
    """A power series did not converge within the term budget."""

    def __init__(self, message, a=None, b=None, c=None, x=None, terms=None):
        super().__init__(message)
        self.a = a
        self.b = b
        self.c = c
        self.x = x
        self.terms = terms


class QuadratureError(NumericalError):
    """Adaptive quadrature reported non-convergence or bad behaviour."""


class SubsetCapError(CacheCancelError):
    """Explicit subset enumeration would exceed the configured cap."""


class ConfigError(CacheCancelError):
    """An experiment config file is missing, malformed, or inconsistent."""
