"""Exception hierarchy shared by the compiler and the runtime.

Every user-facing error carries an optional source span so the CLI can
render ``file:line:col`` diagnostics.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from relog.syntax.source import Span


class RelogError(Exception):
    """Base class for all errors raised by the language toolchain."""

    def __init__(self, message: str, span: Optional["Span"] = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def render(self) -> str:
        if self.span is not None:
            return f"{self.span.location()}: error: {self.message}"
        return f"error: {self.message}"


# -- syntax ------------------------------------------------------------

class LexError(RelogError):
    pass


class ParseError(RelogError):
    def __init__(self, message: str, span: Optional["Span"] = None, expected: Optional[set[str]] = None):
        super().__init__(message, span)
        self.expected = expected or set()


class AdtParseError(RelogError):
    """A runtime string did not parse into a term of the expected ADT."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(message)
        self.position = position


# -- typing ------------------------------------------------------------

class TypeCheckError(RelogError):
    pass


class UnknownRelationError(TypeCheckError):
    pass


class UnknownConstructorError(TypeCheckError):
    pass


class RangeRestrictionError(TypeCheckError):
    pass


class UnboundForeignArgumentError(TypeCheckError):
    pass


# -- attributes / compilation -------------------------------------------

class UnknownAttributeError(RelogError):
    pass


class AttributeArityError(RelogError):
    pass


class AttributeRejectedDecl(RelogError):
    """An attribute's own sanity checks rejected the decorated declaration."""


class ProbSumExceedsOneError(RelogError):
    pass


class UnstratifiableNegationError(RelogError):
    def __init__(self, message: str, cycle: Optional[list[str]] = None):
        super().__init__(message)
        self.cycle = cycle or []


class InternalError(RelogError):
    pass


# -- provenance ---------------------------------------------------------

class WmcSupportTooLargeError(RelogError):
    def __init__(self, support: int, cap: int):
        super().__init__(f"weighted model count support {support} exceeds cap {cap}")
        self.support = support
        self.cap = cap


class AggWorldCapExceededError(RelogError):
    def __init__(self, support: int, cap: int):
        super().__init__(f"aggregate world enumeration support {support} exceeds cap {cap}")
        self.support = support
        self.cap = cap


# -- runtime ------------------------------------------------------------

class FactTypeError(RelogError):
    pass


class FileFormatError(RelogError):
    pass


class IterationCapExceededError(RelogError):
    pass


class ArithmeticOverflowError(RelogError):
    pass


class DivisionByZeroError(RelogError):
    pass


class InvalidCastError(RelogError):
    pass


class ShapeMismatchError(RelogError):
    pass


class ZeroVectorError(RelogError):
    pass


# -- foreign interface ----------------------------------------------------

class DuplicateRegistrationError(RelogError):
    pass


class ForeignEvalError(RelogError):
    def __init__(self, predicate: str, cause: str):
        super().__init__(f"foreign predicate '{predicate}' failed: {cause}")
        self.predicate = predicate
        self.cause = cause


class MalformedForeignOutput(ForeignEvalError):
    pass


class FixtureMissError(RelogError):
    def __init__(self, key: str):
        super().__init__(f"no fixture entry for input {key}")
        self.key = key


class BridgeIoError(RelogError):
    pass


class BridgeTimeoutError(BridgeIoError):
    pass
