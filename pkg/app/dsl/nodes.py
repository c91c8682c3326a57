"""
Expression tree of the formula DSL.

Nodes are frozen dataclasses. ``span`` holds the ``(start, end)`` byte
offsets of the node in its source text and does not take part in equality,
so a re-parsed printout compares equal to the original tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Span = Optional[tuple[int, int]]

FUNCTIONS = {"exp": 1, "log": 1, "sin": 1, "cos": 1, "sqrt": 1}

# binding powers shared by the parser and the printer
PRECEDENCE = {"+": 10, "-": 10, "*": 20, "/": 20, "neg": 30, "^": 40}
ATOM = 100


@dataclass(frozen=True)
class Num:
    """Numeric literal (bound constants are folded into literals)."""

    value: float
    span: Span = field(default=None, compare=False)


@dataclass(frozen=True)
class Var:
    """Reference to the ambient coordinate with position ``index``."""

    name: str
    index: int
    span: Span = field(default=None, compare=False)


@dataclass(frozen=True)
class Unary:
    """Negation."""

    op: str
    operand: Node
    span: Span = field(default=None, compare=False)


@dataclass(frozen=True)
class Binary:
    """Binary operation, one of ``+ - * / ^``."""

    op: str
    left: Node
    right: Node
    span: Span = field(default=None, compare=False)


@dataclass(frozen=True)
class Call:
    """Elementary function applied to one argument."""

    func: str
    arg: Node
    span: Span = field(default=None, compare=False)


Node = Union[Num, Var, Unary, Binary, Call]


def precedence(node: Node) -> int:
    """Binding power of the operator at the root of ``node``."""
    if isinstance(node, Binary):
        return PRECEDENCE[node.op]
    if isinstance(node, Unary):
        return PRECEDENCE["neg"]
    return ATOM


def constant_value(node: Node) -> Optional[float]:
    """Return the value of a literal or a negated literal, else None."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Unary) and isinstance(node.operand, Num):
        return -node.operand.value
    return None


def _format_number(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def to_text(node: Node) -> str:
    """Print ``node`` with the fewest parentheses that re-parse to the same tree."""
    if isinstance(node, Num):
        return _format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Unary):
        inner = to_text(node.operand)
        if precedence(node.operand) < PRECEDENCE["neg"]:
            inner = f"({inner})"
        return f"-{inner}"

    prec = PRECEDENCE[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        # right associative: the left operand binds tighter
        if precedence(node.left) <= prec:
            left = f"({left})"
        if precedence(node.right) < prec and not isinstance(node.right, Unary):
            right = f"({right})"
    else:
        if precedence(node.left) < prec:
            left = f"({left})"
        if precedence(node.right) <= prec:
            right = f"({right})"
    return f"{left}{node.op}{right}"


def substitute(node: Node, replacements: dict[int, Node]) -> Node:
    """Replace variable references by whole sub-trees, keyed by variable index."""
    if isinstance(node, Var):
        return replacements.get(node.index, node)
    if isinstance(node, Unary):
        return Unary(node.op, substitute(node.operand, replacements))
    if isinstance(node, Binary):
        return Binary(
            node.op,
            substitute(node.left, replacements),
            substitute(node.right, replacements),
        )
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, replacements))
    return node
