"""
Tests for web description schemas and builtins.

Tests:
- Valid descriptions build webs with default labels and bound constants.
- Invalid descriptions raise InputError.
- Builtins list, build and reject unknown names.
"""

import json

import pytest

from app.core.exceptions import InputError
from app.webs.builtins import (
    builtin_spec,
    get_builtin,
    linear_form_text,
    list_builtins,
    paper_mw_check,
    random_linear_spec,
)
from app.webs.schemas import load_web_spec

VALID = {
    "dimension": 3,
    "variables": ["u", "v", "w"],
    "constants": {"a": 2.0},
    "foliations": [
        {"kind": "first_integrals", "exprs": ["w - a*u"]},
        {"kind": "direction", "exprs": ["1", "a", "0"], "label": "D"},
        {"kind": "slopes", "codim": 1, "exprs": ["1", "0"]},
    ],
    "base_point": [0.1, 0.2, 0.3],
}


def test_valid_description_builds_web():
    """Labels default to F<position> and constants are bound."""
    spec = load_web_spec(json.dumps(VALID))
    web = spec.to_web()
    assert web.label == "web"
    assert web.codims == (1, 2, 1)
    assert [f.label for f in web.foliations] == ["F1", "D", "F3"]
    assert web.foliations[0].fields[0].value_at([1.0, 0.0, 0.0]) == pytest.approx(-2.0)


def test_constant_overrides():
    """Command line constants override the file's constants."""
    web = load_web_spec(json.dumps(VALID)).to_web({"a": 3.0})
    assert web.foliations[0].fields[0].value_at([1.0, 0.0, 0.0]) == pytest.approx(-3.0)


@pytest.mark.parametrize(
    "change",
    [
        {"dimension": 1},
        {"variables": ["u", "v"]},
        {"base_point": [0.0]},
        {"foliations": []},
        {"foliations": [{"kind": "slopes", "exprs": ["1", "0"]}]},
        {"foliations": [{"kind": "slopes", "codim": 2, "exprs": ["1"]}]},
        {"foliations": [{"kind": "direction", "exprs": ["1", "0"]}]},
        {"foliations": [{"kind": "first_integrals", "exprs": ["u", "v", "w"]}]},
        {"foliations": [{"kind": "curves", "exprs": ["u"]}]},
        {"colour": "red"},
    ],
)
def test_invalid_descriptions(change):
    """Shape and schema errors are reported as InputError."""
    with pytest.raises(InputError):
        load_web_spec(json.dumps({**VALID, **change}))


def test_malformed_json():
    """Text that is not JSON is an input error."""
    with pytest.raises(InputError):
        load_web_spec("{not json")


def test_linear_form_text():
    """Linear forms print with signs and trimmed coefficients."""
    assert linear_form_text([1.5, -2.0, 0.0], ["x", "y", "z"]) == "1.5*x - 2*y"
    assert linear_form_text([-1.0], ["y"], offset=0.25) == "-1*y + 0.25"
    assert linear_form_text([0.0, 0.0], ["x", "y"]) == "0"


def test_random_linear_spec_is_seeded():
    """The same seed gives the same description."""
    first = random_linear_spec(4, 6, seed=3)
    assert first == random_linear_spec(4, 6, seed=3)
    assert first.variables == ["x1", "x2", "x3", "x4"]
    assert len(first.foliations) == 6
    assert first.to_web().is_codim1


def test_builtins_catalogue():
    """Every builtin web validates and builds."""
    names = [b.name for b in list_builtins()]
    assert len(names) >= 6
    for builtin in list_builtins():
        if builtin.is_web:
            spec = builtin_spec(builtin.name)
            assert len(spec.base_point) == spec.dimension
            spec.to_web()


def test_bol_and_w8_shapes():
    """Bol's web has five integrals; w8 has eight directions and binds eps."""
    bol = builtin_spec("bol")
    assert [f.exprs for f in bol.foliations][4] == ["x*(1 - y)/(y*(1 - x))"]
    assert len(bol.foliations) == 5
    w8 = builtin_spec("w8", {"eps": 0.5})
    assert len(w8.foliations) == 8
    assert all(f.kind == "direction" for f in w8.foliations)
    assert w8.constants == {"eps": 0.5}
    assert builtin_spec("w8").constants == {"eps": 1.0}


def test_mixed_builtin_depends_on_seed():
    """The mixed 6-web changes with the seed and keeps its codimensions."""
    first, second = builtin_spec("mixed6_c3", seed=1), builtin_spec("mixed6_c3", seed=2)
    assert first != second
    assert first.to_web().codims == (1, 1, 1, 2, 2, 2)


def test_unknown_and_check_builtins():
    """Unknown names and non-web builtins are rejected by builtin_spec."""
    with pytest.raises(InputError):
        get_builtin("nope")
    with pytest.raises(InputError):
        builtin_spec("paper_mw_check")
    assert not get_builtin("paper_mw_check").is_web


def test_determinant_check_builtin():
    """The determinant identity holds at seeded slope pairs."""
    ratios = paper_mw_check(seed=4, trials=10)
    assert len(ratios) == 10
    assert all(r.ratio == pytest.approx(4.0, rel=1e-8) for r in ratios)
