"""
Tests for shared helpers, settings and the exception hierarchy.

Tests:
- `sample_points` is seeded, starts at the base point and stays in the ball.
- `parse_point` and `parse_constants` accept and reject CLI strings.
- Settings read ``WEBLIN_`` environment variables.
- Exit codes of the exception classes.
"""

import numpy as np
import pytest

from app.core.config import Settings
from app.core.exceptions import (
    DivisionByNonUnit,
    DSLSyntaxError,
    InputError,
    SingularAtPoint,
    UnderdeterminedWeb,
)
from app.core.utils import parse_constants, parse_point, sample_points


def test_sample_points():
    """Samples are reproducible, start at the base and lie within the radius."""
    base = [0.5, -0.5, 1.0]
    points = sample_points(base, count=20, radius=0.1, seed=3)
    assert len(points) == 20
    assert np.array_equal(points[0], base)
    assert all(np.linalg.norm(p - base) <= 0.1 + 1e-12 for p in points)
    again = sample_points(base, count=20, radius=0.1, seed=3)
    assert all(np.array_equal(p, q) for p, q in zip(points, again))
    other = sample_points(base, count=20, radius=0.1, seed=4)
    assert not np.array_equal(points[1], other[1])


def test_parse_point():
    """Comma separated coordinates become floats."""
    assert parse_point("1, -2.5,3e-1") == [1.0, -2.5, 0.3]
    with pytest.raises(InputError):
        parse_point("1,a")


def test_parse_constants():
    """Repeated name=value options build a dictionary."""
    assert parse_constants(["eps=0.5", " a = 2"]) == {"eps": 0.5, "a": 2.0}
    assert parse_constants(None) == {}
    for bad in (["eps"], ["=1"], ["eps=x"]):
        with pytest.raises(InputError):
            parse_constants(bad)


def test_settings_from_environment(monkeypatch):
    """Settings are overridden by prefixed environment variables."""
    monkeypatch.setenv("WEBLIN_JET_ORDER", "5")
    monkeypatch.setenv("WEBLIN_SEED", "42")
    loaded = Settings()
    assert loaded.jet_order == 5
    assert loaded.seed == 42
    assert loaded.app_name == "webLinearization"


def test_exit_codes():
    """Input errors exit with 3, degenerate geometry with 2."""
    assert InputError.exit_code == 3
    assert DSLSyntaxError("bad", 0).exit_code == 3
    assert SingularAtPoint.exit_code == 2
    assert DivisionByNonUnit.exit_code == 2
    error = UnderdeterminedWeb(12, 15)
    assert error.exit_code == 2
    assert "12 equations for 15 unknowns" in str(error)


def test_syntax_error_message():
    """Syntax errors list the expected tokens."""
    error = DSLSyntaxError("unexpected '*'", 3, {"number", "("}, "x +* y")
    assert str(error) == "unexpected '*' at offset 3 (expected one of: (, number)"
