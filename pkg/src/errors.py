"""
Exception hierarchy shared by the kernels, the workflows, the CLI and the API.
"""

from typing import Any


class MomentSegError(Exception):
    """Base class for every error raised by the toolkit."""


class ValidationError(MomentSegError, ValueError):
    """Input violates a documented precondition or type invariant."""


class DegenerateWeights(ValidationError):
    """A weight vector has no strictly positive entry."""


class ConfigurationError(MomentSegError):
    """Settings could not be loaded or failed validation."""


class TrackerFailure(MomentSegError):
    """A tracker could not produce a mask for a frame."""

    def __init__(self, frame: int, reason: str = "tracker failure"):
        super().__init__(f"{reason} at frame {frame}")
        self.frame = frame
        self.reason = reason


def wrap_pydantic_error(exc: Exception, what: str) -> ValidationError:
    """
    Convert a pydantic validation error into the toolkit's ValidationError.

    Args:
        exc: Error raised by pydantic while constructing a model
        what: Name of the object being validated (used in the message)

    Returns:
        ValidationError carrying the first pydantic message
    """
    errors: Any = getattr(exc, "errors", None)
    if callable(errors):
        details = errors()
        if details:
            first = details[0]
            loc = ".".join(str(part) for part in first.get("loc", ()))
            msg = first.get("msg", str(exc))
            return ValidationError(f"invalid {what}: {loc + ': ' if loc else ''}{msg}")
    return ValidationError(f"invalid {what}: {exc}")
