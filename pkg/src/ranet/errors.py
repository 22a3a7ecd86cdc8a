"""Exception types shared across the package."""


class RanError(Exception):
    """Base class for all package errors."""


class CapacityError(RanError):
    """A request would exceed a configured size or memory cap."""


class TraceError(RanError, IndexError):
    """A face index lies outside the range valid at its step."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DomainError(RanError, ValueError):
    """An argument lies outside the domain of an operation."""
