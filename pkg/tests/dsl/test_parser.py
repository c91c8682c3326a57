"""
Tests for the formula parser and printer.

This module checks operator precedence and associativity, error offsets,
constant folding, and that printed expressions parse back to the same tree.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.exceptions import DSLSyntaxError, UnknownIdentifier
from app.dsl.nodes import Binary, Call, Num, Unary, Var, to_text
from app.dsl.parser import parse_expression, tokenize, variable_table

XY = {"x": 0, "y": 1}


def test_precedence_and_left_associativity():
    """Multiplication binds tighter than addition; subtraction is left associative."""
    tree = parse_expression("1 + 2*x - y", XY)
    assert tree == Binary(
        "-",
        Binary("+", Num(1.0), Binary("*", Num(2.0), Var("x", 0))),
        Var("y", 1),
    )


def test_power_is_right_associative():
    """2^3^2 is 2^(3^2)."""
    assert parse_expression("2^3^2", XY) == Binary(
        "^", Num(2.0), Binary("^", Num(3.0), Num(2.0))
    )


def test_negation_binds_looser_than_power():
    """-x^2 is -(x^2)."""
    assert parse_expression("-x^2", XY) == Unary("-", Binary("^", Var("x", 0), Num(2.0)))


def test_function_call_and_spans():
    """Calls record their byte span; parentheses widen spans."""
    tree = parse_expression("exp(x) * (y)", XY)
    assert tree == Binary("*", Call("exp", Var("x", 0)), Var("y", 1))
    assert tree.left.span == (0, 6)
    assert tree.right.span == (9, 12)


def test_syntax_error_offset():
    """'x +* y' fails at offset 3, expecting an operand."""
    with pytest.raises(DSLSyntaxError) as info:
        parse_expression("x +* y", XY)
    assert info.value.offset == 3
    assert "number" in info.value.expected
    assert "offset 3" in str(info.value)


def test_unexpected_character_and_trailing_input():
    """Stray characters and unbalanced parentheses are rejected."""
    with pytest.raises(DSLSyntaxError) as info:
        parse_expression("x $ y", XY)
    assert info.value.offset == 2
    with pytest.raises(DSLSyntaxError):
        parse_expression("(x + y", XY)
    with pytest.raises(DSLSyntaxError):
        parse_expression("x y", XY)


def test_unknown_identifier():
    """Names that are not variables, constants or functions are errors."""
    with pytest.raises(UnknownIdentifier) as info:
        parse_expression("x + eps", XY)
    assert info.value.name == "eps"
    assert info.value.offset == 4


def test_constants_are_folded():
    """Bound constants become literals, negative ones a negated literal."""
    tree = parse_expression("eps*y/x", {"x": 0, "y": 1, "z": 2}, {"eps": 0.5})
    assert tree == Binary("/", Binary("*", Num(0.5), Var("y", 1)), Var("x", 0))
    assert parse_expression("c", XY, {"c": -2}) == Unary("-", Num(2.0))


def test_unexpected_character_offset_after_tokens():
    """Stray characters are reported at their byte offset."""
    with pytest.raises(DSLSyntaxError) as info:
        parse_expression("x + é", XY)
    assert info.value.offset == 4
    kinds = [t.kind for t in tokenize("exp(x1)")]
    assert kinds == ["identifier", "op", "identifier", "op", "end"]


def test_variable_table_defaults_and_aliases():
    """Default names are x1..xn with x, y, z aliases up to dimension 3."""
    assert variable_table(None, 2) == {"x1": 0, "x2": 1, "x": 0, "y": 1}
    assert "z" not in variable_table(None, 4)
    assert variable_table(["u", "v"], None) == {"u": 0, "v": 1}
    with pytest.raises(DSLSyntaxError):
        variable_table(["u", "u"], None)


def test_printer_uses_minimal_parentheses():
    """Printing keeps only the parentheses the grammar needs."""
    for text, printed in (
        ("x*(1-y)/(y*(1-x))", "x*(1-y)/(y*(1-x))"),
        ("(x + y) + 1", "x+y+1"),
        ("x - (y - 1)", "x-(y-1)"),
        ("(x^2)^3", "(x^2)^3"),
        ("x^-1", "x^-1"),
        ("-(x + y)", "-(x+y)"),
    ):
        assert to_text(parse_expression(text, XY)) == printed


_atoms = st.sampled_from(["x", "y", "2", "0.5", "exp(x)", "sin(y)"])
_exprs = st.recursive(
    _atoms,
    lambda inner: st.one_of(
        st.tuples(inner, st.sampled_from(["+", "-", "*", "/", "^"]), inner).map(
            lambda t: f"({t[0]}){t[1]}({t[2]})"
        ),
        inner.map(lambda e: f"-({e})"),
        inner.map(lambda e: f"log({e})"),
    ),
    max_leaves=8,
)


@settings(max_examples=100, deadline=None)
@given(_exprs)
def test_print_then_parse_is_identity(text):
    """Printed trees re-parse to equal trees."""
    tree = parse_expression(text, XY)
    assert parse_expression(to_text(tree), XY) == tree
