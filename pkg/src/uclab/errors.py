"""Exception hierarchy shared by all uclab modules."""


class UclabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(UclabError, ValueError):
    """A numeric argument is outside the mathematical domain of an operation."""


class UsageError(UclabError, ValueError):
    """Inputs are structurally invalid (mismatched spaces, bad combinations)."""


class FormatError(UclabError, ValueError):
    """A text input could not be parsed; carries a 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapabilityError(UclabError, ValueError):
    """The request exceeds a documented size limit of this implementation."""
