"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    The best available estimate is kept so callers can still report a
    partial result.
    """

    def __init__(self, message: str, value: float, err_estimate: float):
        super().__init__(f"{message} (value={value!r}, err_estimate={err_estimate!r})")
        self.value = value
        self.err_estimate = err_estimate


class NoMassError(ValueError):
    """The conditioning event leaves no prior mass (e.g. xi above every atom)."""


class InsufficientSampleError(RuntimeError):
    """A Monte Carlo estimator accepted too few paths to be meaningful."""


class UnsupportedConfigurationError(RuntimeError):
    """The closed-form route does not cover this configuration."""
