"""Exception types shared across the package."""

from .tree import LeafSetMismatch, NewickError

__all__ = [
    "BudgetExceeded",
    "FormatError",
    "LeafSetMismatch",
    "NewickError",
    "PreconditionError",
    "VerificationError",
]


class PreconditionError(ValueError):
    """An operation was called on input outside its documented domain."""


class FormatError(ValueError):
    """Malformed network, generator, character or trace file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetExceeded(RuntimeError):
    """A search ran out of its work budget before reaching an answer.

    ``lower`` and ``upper`` carry whatever bounds were certified so far.
    """

    def __init__(self, message, lower=None, upper=None):
        self.lower = lower
        self.upper = upper
        super().__init__(message)


class VerificationError(AssertionError):
    """A certificate or identity check failed.

    ``check`` names the violated property (e.g. ``"leaf-count"``) and
    ``details`` carries the offending data.
    """

    def __init__(self, check, message, details=None):
        self.check = check
        self.details = details or {}
        super().__init__(f"[{check}] {message}")
