"""Exception types shared across the package."""


class CclabError(Exception):
    """Base class for all errors raised by cclab."""


class RegisterError(CclabError, ValueError):
    """Unknown, duplicated or overlapping register / variable names."""


class StateError(CclabError, ValueError):
    """A matrix or vector violates the state invariants (trace, PSD, norm)."""


class SizeError(CclabError, ValueError):
    """A construction or enumeration would exceed a configured cap."""

    def __init__(self, message: str, estimated: int | None = None):
        super().__init__(message)
        self.estimated = estimated


class DomainError(CclabError, ValueError):
    """An argument lies outside the domain of an operation."""


class ProtocolError(CclabError, RuntimeError):
    """A protocol misbehaved during execution."""


class MaxRoundsError(ProtocolError):
    """The schedule was exhausted before the output party produced an output."""
