"""Error types raised across the screening toolkit."""
from typing import Any, Dict, Optional


class ScreeningError(Exception):
    """Base class for every error raised by the toolkit."""


class DimensionMismatch(ScreeningError, ValueError):
    """Vector or matrix sizes do not agree with the problem."""

    def __init__(self, what: str, expected: int, got: int):
        super().__init__(f"{what}: expected length {expected}, got {got}")
        self.what = what
        self.expected = expected
        self.got = got


class InfeasiblePair(ScreeningError):
    """The primal-dual pair is outside dom(P) x dom(-D)."""


class NegativeRadicand(ScreeningError):
    """A radius radicand is negative beyond roundoff."""

    def __init__(self, tag: str, radicand: float):
        super().__init__(f"{tag} ball: radicand {radicand:.3e} is negative")
        self.tag = tag
        self.radicand = radicand


class LinkageViolated(ScreeningError):
    """The pair does not satisfy A^T u in dg(x) but the ball requires it."""


class WrongFamily(ScreeningError):
    """The operation is not defined for this smooth part / regularizer."""


class SolverFailed(ScreeningError):
    """The solver exhausted its iteration budget."""

    def __init__(self, message: str, result: Any = None):
        super().__init__(message)
        self.result = result


class SafetyViolation(ScreeningError):
    """A ball built as safe does not contain the reference dual optimum."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InstanceParseError(ScreeningError, ValueError):
    """An instance file could not be parsed."""

    def __init__(self, path: str, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line
        self.reason = reason
