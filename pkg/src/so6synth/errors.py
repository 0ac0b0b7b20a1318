"""Exception hierarchy shared by the engine and the command line."""

from __future__ import annotations


class SO6Error(Exception):
    """Base class for every error raised by the package."""


class DyadicOverflow(SO6Error, ArithmeticError):
    """A packed field of a dyadic value would not fit its bit width."""


class InvalidMatrix(SO6Error, ValueError):
    """A matrix violates reduction, orthogonality or determinant invariants."""


class ParseError(SO6Error, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class IntegrityError(SO6Error):
    """Internal consistency check failed (corrupt table, bad witness, ...)."""


class CorruptFileError(IntegrityError):
    def __init__(self, message: str, offset: int | None = None):
        text = message if offset is None else f"{message} (at byte offset {offset})"
        super().__init__(text)
        self.offset = offset


class SearchBudgetExceeded(SO6Error):
    """A search hit its configured depth cap before meeting; not a proof of absence."""


class ResourceExhausted(SO6Error):
    """Memory or node limits were hit; carries a partial-progress report."""

    def __init__(self, message: str, completed_layers: list[int] | None = None):
        super().__init__(message)
        self.completed_layers = completed_layers or []
