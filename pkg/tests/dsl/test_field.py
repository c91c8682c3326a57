"""
Tests for scalar fields.

Tests:
- Pointwise and jet evaluation of parsed expressions.
- Error spans of failing nodes.
- Constants, composition and renaming.
"""

import numpy as np
import pytest

from app.core.exceptions import DivisionByNonUnit, DomainError
from app.dsl.field import ScalarField, parse_fields


def test_value_at():
    """x*(1-y)/(y*(1-x)) at (0.3, 0.5) is 3/7."""
    field = ScalarField.parse("x*(1-y)/(y*(1-x))", nvars=2)
    assert field.value_at([0.3, 0.5]) == pytest.approx(3 / 7)


def test_jet_of_monomial():
    """x^2*y at (1, 2) expands to 2 + 4u + v + 2u^2 + 2uv + u^2 v."""
    jet = ScalarField.parse("x^2*y", nvars=2).eval_jet([1.0, 2.0], 2)
    assert jet.value == pytest.approx(2.0)
    assert np.allclose(jet.gradient(), [4.0, 1.0])
    assert jet.coeff((2, 0)) == pytest.approx(2.0)
    assert jet.coeff((1, 1)) == pytest.approx(2.0)
    assert jet.coeff((0, 2)) == pytest.approx(0.0)


def test_jet_of_geometric_series():
    """1/(1-x*y) at the origin is 1 + xy + x^2 y^2."""
    jet = ScalarField.parse("1/(1-x*y)", nvars=2).eval_jet([0.0, 0.0], 4)
    assert jet.value == pytest.approx(1.0)
    assert jet.coeff((1, 1)) == pytest.approx(1.0)
    assert jet.coeff((2, 2)) == pytest.approx(1.0)
    assert jet.coeff((2, 0)) == pytest.approx(0.0)


def test_jet_matches_pointwise_value():
    """The constant term of the jet is the pointwise value."""
    field = ScalarField.parse("exp(x)*sin(y) + sqrt(1 + x^2) - log(2 + y)^1.5", nvars=2)
    point = [0.4, -0.3]
    assert field.eval_jet(point, 3).value == pytest.approx(field.value_at(point))


def test_division_by_zero_carries_span():
    """y/x at (0, 1) fails at the division node."""
    field = ScalarField.parse("y/x", nvars=2)
    with pytest.raises(DivisionByNonUnit) as info:
        field.eval_jet([0.0, 1.0], 2)
    assert info.value.span == (0, 3)
    with pytest.raises(DivisionByNonUnit) as info:
        field.value_at([0.0, 1.0])
    assert info.value.span == (0, 3)


def test_domain_error_carries_span():
    """log of a negative argument fails at the call node."""
    field = ScalarField.parse("1 + log(x - 2)", nvars=1)
    with pytest.raises(DomainError) as info:
        field.eval_jet([1.0], 1)
    assert info.value.span == (4, 14)
    assert "span 4:14" in str(info.value)


@pytest.mark.parametrize("point", [[-2.0, 2.0], [0.0, 3.0], [-1.5, 0.5]])
def test_variable_exponent_domain_agrees(point):
    """Jet and pointwise evaluation reject the same bases for a variable exponent."""
    field = ScalarField.parse("x^y", nvars=2)
    with pytest.raises(DomainError):
        field.eval_jet(point, 2)
    with pytest.raises(DomainError):
        field.value_at(point)


def test_variable_exponent_on_positive_base():
    """x^y at (2, 3) is 8 with derivative y x^(y-1) = 12 in x."""
    field = ScalarField.parse("x^y", nvars=2)
    jet = field.eval_jet([2.0, 3.0], 1)
    assert jet.value == pytest.approx(8.0)
    assert field.value_at([2.0, 3.0]) == pytest.approx(8.0)
    assert jet.gradient()[0] == pytest.approx(12.0)
    assert jet.gradient()[1] == pytest.approx(8.0 * np.log(2.0))


def test_constants_and_named_variables():
    """Named variables and bound constants parse and evaluate together."""
    (field,) = parse_fields(["eps*u - v"], variables=["u", "v"], constants={"eps": 2.5})
    assert field.nvars == 2
    assert field.value_at([1.0, 0.5]) == pytest.approx(2.0)


def test_compose_and_rename():
    """Substitution composes fields; renaming only changes the printout."""
    outer = ScalarField.parse("x + y^2", nvars=2)
    inner = parse_fields(["x*y", "x - y"], nvars=2)
    composed = outer.compose(inner)
    assert composed.value_at([2.0, 3.0]) == pytest.approx(6.0 + 1.0)
    assert outer.to_text(["u", "v"]) == "u+v^2"
    assert ScalarField.constant(-1.5, 2).value_at([0.0, 0.0]) == -1.5
