"""Exception hierarchy shared by all blinkprox modules."""

from __future__ import annotations


class BlinkError(Exception):
    """Base class for every error raised by this package."""


class CapExceeded(BlinkError):
    """The reduced graph is too large for exact evaluation."""


class BudgetExceeded(BlinkError):
    """Path enumeration would retain more paths than allowed."""


class Unreachable(BlinkError):
    """No path connects the requested endpoints."""


class Divergent(BlinkError):
    """A series-based measure does not converge for the given parameter."""


class DegenerateUsage(BlinkError):
    """An edge on a path has zero usage, so no hypothetical subgraph exists."""


class NumericError(BlinkError, ArithmeticError):
    """An intermediate quantity violated a bound it must satisfy."""


class WeightRangeError(BlinkError, ValueError):
    """A weight falls outside the interval (0, 1]."""


class ParseError(BlinkError, ValueError):
    def __init__(self, message: str, path: str | None = None, lineno: int | None = None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}:{lineno}: " if lineno is not None else f"{path}: "
        super().__init__(where + message)
