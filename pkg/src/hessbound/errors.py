"""Exception types shared across the package."""

from __future__ import annotations


class HessboundError(Exception):
    """Base class for all errors raised by hessbound."""


class DomainViolation(HessboundError, ValueError):
    """An operation was applied outside its domain.

    ``line`` and ``op`` are filled in when the violation happens while
    executing a codelist; they stay ``None`` for bare interval operations.
    """

    def __init__(self, message: str, line: int | None = None, op: str | None = None):
        self.line = line
        self.op = op
        if line is not None:
            message = f"line y{line} ({op}): {message}"
        super().__init__(message)


class ParseError(HessboundError, ValueError):
    """Malformed or unsupported expression text."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class DimensionError(HessboundError, ValueError):
    """Mismatched or unsupported dimensions."""


class DimensionLimitExceeded(DimensionError):
    """Hertz-Rohn vertex enumeration requested above the configured cap."""


class InconsistentBounds(HessboundError):
    """Spectral bounds violate an ordering that must hold by construction."""


class CorpusError(HessboundError, ValueError):
    """Malformed benchmark corpus, boxes file or cost table."""
