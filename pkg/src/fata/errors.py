"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


class FataError(Exception):
    """Base class for all errors raised by this package."""


class ForestSyntaxError(FataError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownSymbolError(FataError):
    def __init__(self, symbol: str, position: int | None = None):
        self.symbol = symbol
        self.position = position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"unknown symbol {symbol!r}{where}")


class HoleError(FataError):
    """A context has no hole, several holes, or a hole with children."""


class AlphabetMismatch(FataError):
    pass


class NotDeterministic(FataError):
    pass


class SubstitutionError(FataError):
    pass


class CapExceeded(FataError):
    """A configurable resource cap was hit; the result is unknown, not negative."""

    def __init__(self, what: str, cap: int):
        self.what = what
        self.cap = cap
        super().__init__(f"{what} exceeds cap of {cap}")


class Undecidable(FataError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    file: str
    line: int
    message: str
    tokens: tuple[str, ...] = ()

    def __str__(self) -> str:
        loc = f"{self.file}:{self.line}" if self.line else self.file
        extra = f" [{' '.join(self.tokens)}]" if self.tokens else ""
        return f"{loc}: {self.message}{extra}"


class ValidationError(FataError):
    """Raised with one or more diagnostics; no partial value escapes."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))
