"""
Pratt parser for the formula DSL.

Grammar (see docs/dsl.md for the EBNF)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := number | identifier | function "(" expr ")" | "(" expr ")"

Each token kind carries a left binding power; prefix handlers (``nud``) and
infix handlers (``led``) build :mod:`app.dsl.nodes` trees with byte spans.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from app.core.exceptions import DSLSyntaxError, UnknownIdentifier
from app.dsl.nodes import FUNCTIONS, PRECEDENCE, Binary, Call, Node, Num, Unary, Var

PREFIX_EXPECTED = frozenset({"number", "identifier", "(", "-"})
INFIX_EXPECTED = frozenset({"+", "-", "*", "/", "^", "end of input"})

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<identifier>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
    r"|(?P<bad>\S)"
    r")"
)


@dataclass(frozen=True)
class Token:
    """Lexical token with its byte offsets."""

    kind: str
    text: str
    start: int
    end: int

    @property
    def lbp(self) -> int:
        """Left binding power (0 for tokens that end an expression)."""
        if self.kind == "op" and self.text in "+-*/^":
            return PRECEDENCE[self.text]
        return 0


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens, ending with an ``end`` token."""
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            break
        kind = match.lastgroup
        if kind is None:
            break
        start, end = match.span(kind)
        if kind == "bad":
            raise DSLSyntaxError(
                f"unexpected character {match.group(kind)!r}",
                _byte_offset(text, start),
                PREFIX_EXPECTED,
                text,
            )
        tokens.append(
            Token(kind, match.group(kind), _byte_offset(text, start), _byte_offset(text, end))
        )
        pos = match.end()
    size = len(text.encode("utf-8"))
    tokens.append(Token("end", "", size, size))
    return tokens


class Parser:
    """
    Recursive Pratt parser over a token list.

    Args:
        text (str): Source expression.
        variables (dict[str, int]): Variable name to coordinate index.
        constants (dict[str, float]): Named constants folded into literals.
    """

    def __init__(self, text: str, variables: dict[str, int], constants: Optional[dict] = None):
        self.text = text
        self.variables = variables
        self.constants = constants or {}
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def token(self) -> Token:
        """Current lookahead token."""
        return self.tokens[self.pos]

    def advance(self) -> Token:
        """Consume and return the lookahead token."""
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: Token, expected) -> DSLSyntaxError:
        """Build a syntax error located at ``tok``."""
        return DSLSyntaxError(message, tok.start, expected, self.text)

    def expect(self, text: str) -> Token:
        """Consume an operator token with the given text."""
        if self.token.kind != "op" or self.token.text != text:
            raise self.error(f"expected '{text}'", self.token, {text})
        return self.advance()

    def parse(self) -> Node:
        """Parse the whole input as one expression."""
        node = self.expression(0)
        if self.token.kind != "end":
            raise self.error(f"unexpected {self.token.text!r}", self.token, INFIX_EXPECTED)
        return node

    def expression(self, rbp: int) -> Node:
        """Parse an expression whose operators bind tighter than ``rbp``."""
        left = self.nud(self.advance())
        while rbp < self.token.lbp:
            left = self.led(self.advance(), left)
        return left

    def nud(self, tok: Token) -> Node:
        """Prefix handler."""
        if tok.kind == "number":
            return Num(float(tok.text), span=(tok.start, tok.end))
        if tok.kind == "identifier":
            return self.identifier(tok)
        if tok.kind == "op" and tok.text == "-":
            operand = self.expression(PRECEDENCE["neg"])
            return Unary("-", operand, span=(tok.start, operand.span[1]))
        if tok.kind == "op" and tok.text == "(":
            inner = self.expression(0)
            close = self.expect(")")
            return _respan(inner, (tok.start, close.end))
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise self.error(f"unexpected {what}", tok, PREFIX_EXPECTED)

    def led(self, tok: Token, left: Node) -> Node:
        """Infix handler."""
        op = tok.text
        # '^' is right associative
        rbp = PRECEDENCE[op] - 1 if op == "^" else PRECEDENCE[op]
        right = self.expression(rbp)
        return Binary(op, left, right, span=(left.span[0], right.span[1]))

    def identifier(self, tok: Token) -> Node:
        """Resolve a name to a variable, a folded constant or a function call."""
        name = tok.text
        span = (tok.start, tok.end)
        if name in self.variables:
            return Var(name, self.variables[name], span=span)
        if name in self.constants:
            value = float(self.constants[name])
            if value < 0:
                return Unary("-", Num(-value, span=span), span=span)
            return Num(value, span=span)
        if name in FUNCTIONS:
            return self.call(tok)
        raise UnknownIdentifier(name, tok.start)

    def call(self, tok: Token) -> Node:
        """Parse ``name(arg, ...)`` and check the arity."""
        self.expect("(")
        args = [self.expression(0)]
        while self.token.kind == "op" and self.token.text == ",":
            self.advance()
            args.append(self.expression(0))
        close = self.expect(")")
        arity = FUNCTIONS[tok.text]
        if len(args) != arity:
            raise DSLSyntaxError(
                f"{tok.text} takes {arity} argument(s), got {len(args)}",
                tok.start,
                (),
                self.text,
            )
        return Call(tok.text, args[0], span=(tok.start, close.end))


def _respan(node: Node, span: tuple[int, int]) -> Node:
    # parentheses widen the span without changing the tree
    return type(node)(**{**node.__dict__, "span": span})


def variable_table(variables: Optional[list[str]], nvars: Optional[int]) -> dict[str, int]:
    """
    Map variable names to coordinate indices.

    Without explicit names the coordinates are ``x1 .. xn``; for ``n <= 3``
    the aliases ``x, y, z`` are accepted too.
    """
    if variables:
        if len(set(variables)) != len(variables):
            raise DSLSyntaxError("duplicate variable names", 0, (), ", ".join(variables))
        for name in variables:
            if name in FUNCTIONS:
                raise DSLSyntaxError(f"variable name {name!r} shadows a function", 0, (), name)
        return {name: i for i, name in enumerate(variables)}
    if nvars is None:
        raise ValueError("either variables or nvars is required")
    table = {f"x{i + 1}": i for i in range(nvars)}
    if nvars <= 3:
        table.update({alias: i for i, alias in enumerate("xyz"[:nvars])})
    return table


def parse_expression(
    text: str,
    variables: dict[str, int],
    constants: Optional[dict] = None,
) -> Node:
    """Parse ``text`` into an expression tree."""
    return Parser(text, variables, constants).parse()
