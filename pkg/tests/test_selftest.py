"""
Tests for the acceptance suite runner.

Every criterion runs for real; the runner's bookkeeping is tested with
stubbed criteria.
"""

import logging

import pytest

from app.core.exceptions import InputError, SingularAtPoint
from app.selftest import CRITERIA, invariance_variants, run_criterion, run_selftest
from app.webs.builtins import builtin_spec


def test_criteria_names():
    """Every acceptance criterion is registered."""
    assert list(CRITERIA) == [
        "det_n3",
        "flat_baseline",
        "diffeo_flat",
        "w8_sweep",
        "bol",
        "mixed6_det",
        "bianchi",
        "tensoriality",
        "planar_anchor",
        "geodesic_leaves",
        "invariance",
    ]


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion_passes(name):
    """Every acceptance criterion passes."""
    passed, detail = CRITERIA[name]()
    assert passed, detail


def test_invariance_variants_cover_the_web():
    """Each variant keeps every foliation and moves the base point with the web."""
    spec = builtin_spec("bol")
    web = spec.to_web()
    variants = invariance_variants(web, spec.base_point)
    assert set(variants) == {"original", "reversed", "seed", "affine"}
    reversed_web, _, _ = variants["reversed"]
    assert reversed_web.foliations == web.foliations[::-1]
    assert variants["seed"][2] == 17
    moved, y0, _ = variants["affine"]
    assert len(moved.foliations) == len(web.foliations)
    assert y0 == pytest.approx([0.3 + 0.2 * 0.5 + 0.1, 0.3 * 0.3 + 0.5 - 0.2])


def test_run_criterion_reports_failure(mocker, caplog):
    """A failing criterion is logged and reported, not raised."""
    mocker.patch.dict(CRITERIA, {"det_n3": lambda: (False, "ratio 3.9")})
    with caplog.at_level(logging.INFO):
        result = run_criterion("det_n3")
    assert not result.passed
    assert result.detail == "ratio 3.9"
    assert result.seconds >= 0.0
    assert "FAIL det_n3" in caplog.text


def test_run_criterion_turns_errors_into_failures(mocker):
    """Library errors inside a criterion become a failed result."""

    def broken():
        raise SingularAtPoint("no unit pivot")

    mocker.patch.dict(CRITERIA, {"bianchi": broken})
    result = run_criterion("bianchi")
    assert not result.passed
    assert result.detail == "SingularAtPoint: no unit pivot"


def test_run_selftest_selection(mocker):
    """Only the requested criteria run; unknown names are rejected."""
    mocker.patch.dict(CRITERIA, {name: (lambda: (True, "ok")) for name in CRITERIA})
    assert [r.name for r in run_selftest(["bol", "det_n3"])] == ["bol", "det_n3"]
    assert len(run_selftest()) == len(CRITERIA)
    with pytest.raises(InputError):
        run_selftest(["det_n4"])
