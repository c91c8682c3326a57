"""
Exception hierarchy for the web linearization toolkit.

Every error carries the CLI exit code it maps to: input problems exit with 3,
degenerate geometry at a point exits with 2.
"""

from typing import Optional


class WebLinearizationError(Exception):
    """Base class of all errors raised by the application."""

    exit_code = 3


class InputError(WebLinearizationError):
    """Malformed web description, configuration or expression."""


class DSLSyntaxError(InputError):
    """
    Expression text that does not match the grammar.

    Attributes:
        offset (int): Byte offset of the offending token.
        expected (frozenset[str]): Token kinds that would have been accepted.
        text (str): The full source text.
    """

    def __init__(self, message: str, offset: int, expected=(), text: str = ""):
        self.offset = offset
        self.expected = frozenset(expected)
        self.text = text
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class UnknownIdentifier(InputError):
    """A name that is neither a variable, a bound constant nor a function."""

    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier '{name}' at offset {offset}")


class DimensionMismatch(InputError):
    """Operation requested for the wrong ambient dimension."""


class JetError(WebLinearizationError):
    """Base class of truncated power series failures."""

    span: Optional[tuple[int, int]] = None

    def with_span(self, span: Optional[tuple[int, int]]) -> "JetError":
        """Attach the source span of the expression node that failed."""
        if self.span is None and span is not None:
            self.span = span
            self.args = (f"{self.args[0] if self.args else ''} [span {span[0]}:{span[1]}]",)
        return self


class ShapeMismatch(JetError):
    """Jets with different variable count or truncation order were combined."""


class DivisionByNonUnit(JetError):
    """Division by a jet whose constant term is below the pivot tolerance."""

    exit_code = 2


class DomainError(JetError):
    """Elementary function lifted outside its domain."""

    exit_code = 2


class OrderExhausted(JetError):
    """A derivative was requested from an order-zero jet."""


class GeometryError(WebLinearizationError):
    """The web is degenerate at the queried point."""

    exit_code = 2


class TransversalityFailure(GeometryError):
    """Leaves are not graphs over the first coordinates at the point."""


class IntegrabilityFailure(GeometryError):
    """Raw slope input whose prolongation fields do not commute."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class SingularAtPoint(GeometryError):
    """No unit pivot is left in a jet matrix elimination."""


class UnderdeterminedWeb(GeometryError):
    """Fewer equations than projective connection unknowns."""

    def __init__(self, equations: int, unknowns: int):
        self.equations = equations
        self.unknowns = unknowns
        super().__init__(
            f"web gives {equations} equations for {unknowns} unknowns"
        )
