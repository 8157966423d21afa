"""Custom exceptions for Active Rates."""

from __future__ import annotations


class ActiveRatesError(Exception):
    """Base exception for all active-learning library errors."""

    def __init__(self, message: str, original_error: Exception | None = None):
        super().__init__(message)
        self.original_error = original_error


class ConfigurationError(ActiveRatesError):
    """Raised when configuration is invalid or missing."""
    pass


class ValidationError(ActiveRatesError):
    """Raised when a parameter violates its declared domain."""
    pass


class DimensionMismatchError(ActiveRatesError):
    """Raised when a point does not live in the hypothesis' instance space."""
    pass


class EmptyVersionSpaceError(ActiveRatesError):
    """Raised when an operation needs a nonempty version space."""
    pass


class RegionError(ActiveRatesError):
    """Raised when a region representation exceeds its piece budget."""
    pass


class StreamIndexError(ActiveRatesError):
    """Raised when an index addresses a point outside the stream."""
    pass


class BudgetExhaustedError(ActiveRatesError):
    """Raised when a label is requested beyond the label budget."""
    pass


class UnsupportedError(ActiveRatesError):
    """Raised for class/marginal combinations without a supported procedure."""
    pass


class RateFitError(ActiveRatesError):
    """Raised when a learning curve cannot be fitted."""
    pass


class ReportError(ActiveRatesError):
    """Raised when report generation fails."""
    pass


class ReplayError(ActiveRatesError):
    """Raised when a trace file cannot be replayed."""
    pass
