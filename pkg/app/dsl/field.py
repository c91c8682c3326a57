"""
Scalar fields defined by DSL expressions.

A :class:`ScalarField` evaluates its expression tree either on jets (the
truncated Taylor expansion at a point) or on plain numbers. Evaluation
errors are annotated with the source span of the node that failed.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

from app.core.exceptions import DivisionByNonUnit, DomainError, JetError
from app.dsl.nodes import (
    Binary,
    Call,
    Node,
    Num,
    Unary,
    Var,
    constant_value,
    substitute,
    to_text,
)
from app.dsl.parser import parse_expression, variable_table
from app.jets import jet as jets
from app.jets.jet import Jet, seed_point


@dataclass(frozen=True)
class ScalarField:
    """
    Parsed expression in ``nvars`` coordinates.

    Attributes:
        ast (Node): Expression tree.
        nvars (int): Number of ambient coordinates.
        source (str): Text the tree was parsed from (or printed to).
    """

    ast: Node
    nvars: int
    source: str = ""

    @classmethod
    def parse(
        cls,
        text: str,
        variables: Optional[list[str]] = None,
        constants: Optional[dict] = None,
        nvars: Optional[int] = None,
    ) -> ScalarField:
        """Parse ``text`` over the given variables (default ``x1..xn``)."""
        table = variable_table(variables, nvars)
        n = len(variables) if variables else nvars
        return cls(parse_expression(text, table, constants), n, text)

    @classmethod
    def constant(cls, value: float, nvars: int) -> ScalarField:
        """Return the constant field ``value``."""
        node = Num(abs(value)) if value >= 0 else Unary("-", Num(-value))
        return cls(node, nvars, to_text(node))

    def to_text(self, variables: Optional[list[str]] = None) -> str:
        """Print the expression, optionally renaming the coordinates."""
        if variables is None:
            return to_text(self.ast)
        renamed = substitute(
            self.ast, {i: Var(name, i) for i, name in enumerate(variables)}
        )
        return to_text(renamed)

    def eval_jet(self, x0: Sequence[float], order: int) -> Jet:
        """Return the order-``order`` Taylor expansion at ``x0``."""
        return self.evaluate(seed_point(x0, order))

    def evaluate(self, args: Sequence[Jet]) -> Jet:
        """Evaluate with each coordinate replaced by the matching jet."""
        if len(args) != self.nvars:
            raise ValueError(f"expected {self.nvars} jets, got {len(args)}")
        return _eval_jet(self.ast, args)

    def value_at(self, point: Sequence[float]) -> float:
        """Plain pointwise evaluation."""
        if len(point) != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {len(point)}")
        return _eval_value(self.ast, point)

    def compose(self, fields: Sequence[ScalarField]) -> ScalarField:
        """Substitute the ``i``-th coordinate by ``fields[i]``."""
        nvars = fields[0].nvars
        tree = substitute(self.ast, {i: f.ast for i, f in enumerate(fields)})
        return ScalarField(tree, nvars, to_text(tree))


def parse_fields(
    texts: Sequence[str],
    variables: Optional[list[str]] = None,
    constants: Optional[dict] = None,
    nvars: Optional[int] = None,
) -> list[ScalarField]:
    """Parse several expressions over the same coordinates."""
    return [ScalarField.parse(t, variables, constants, nvars) for t in texts]


def _integral(value: Optional[float]) -> bool:
    return value is not None and float(value).is_integer()


def _eval_jet(node: Node, args: Sequence[Jet]) -> Jet:
    try:
        if isinstance(node, Num):
            return Jet.constant(node.value, args[0].nvars, args[0].order)
        if isinstance(node, Var):
            return args[node.index]
        if isinstance(node, Unary):
            return -_eval_jet(node.operand, args)
        if isinstance(node, Call):
            return jets.lift(node.func, _eval_jet(node.arg, args))

        left = _eval_jet(node.left, args)
        if node.op == "^":
            exponent = constant_value(node.right)
            if _integral(exponent):
                return jets.integer_power(left, int(exponent))
            if exponent is not None:
                return jets.pow_r(left, exponent)
            return jets.exp(_eval_jet(node.right, args) * jets.log(left))
        right = _eval_jet(node.right, args)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        return left / right
    except JetError as exc:
        raise exc.with_span(node.span) from None


def _eval_value(node: Node, point: Sequence[float]):
    use_complex = any(isinstance(v, complex) for v in point)
    lib = cmath if use_complex else math
    try:
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            return point[node.index]
        if isinstance(node, Unary):
            return -_eval_value(node.operand, point)
        if isinstance(node, Call):
            return getattr(lib, node.func)(_eval_value(node.arg, point))
        left = _eval_value(node.left, point)
        right = _eval_value(node.right, point)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            return left / right
        integral = constant_value(node.right) is not None and float(right).is_integer()
        if not use_complex and left <= 0 and not integral:
            raise ValueError("power of a non-positive base needs a constant integer exponent")
        return left**right
    except ZeroDivisionError:
        raise DivisionByNonUnit(f"division by zero in '{to_text(node)}'").with_span(
            node.span
        ) from None
    except ValueError as exc:
        raise DomainError(f"{exc} in '{to_text(node)}'").with_span(node.span) from None
