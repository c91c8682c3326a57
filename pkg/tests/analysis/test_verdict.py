"""
Tests for per-point verdicts and tensoriality checks.

Tests:
- `summarize` maps sample records to verdicts and exit codes.
- `evaluate_sample` on flat, curved and degenerate webs.
- `tensoriality_check` on a correct and on a mismatched pair of maps.
"""

import logging

import numpy as np
import pytest

from app.analysis.verdict import (
    evaluate_sample,
    summarize,
    tensoriality_check,
)
from app.core.config import settings
from app.dsl.field import parse_fields
from app.response_models import SampleRecord
from app.selftest import TENSOR_WEB
from app.webs.builtins import builtin_spec, diffeo_fields, random_linear_spec
from app.webs.model import Web, foliation_from_first_integrals


def _record(passed, status="ok"):
    return SampleRecord(point=[0.0, 0.0], status=status, passed=passed)


def _tensor_web():
    fields = parse_fields(TENSOR_WEB, nvars=3)
    return Web(3, tuple(foliation_from_first_integrals([f], 3) for f in fields), "tensor")


def test_summarize():
    """Any failure wins, then skipped samples make the verdict inconclusive."""
    assert summarize([_record(True), _record(True)]) == ("linearizable", 0, 0)
    assert summarize([_record(True), _record(None, "skipped")]) == ("inconclusive", 2, 1)
    assert summarize([_record(False), _record(None, "skipped")]) == ("not_linearizable", 1, 1)


def test_flat_web_sample():
    """A linear 5-web in dimension 3 passes with zero Weyl tensor."""
    spec = builtin_spec("linear5_c3")
    record = evaluate_sample(spec.to_web(), spec.base_point)
    assert record.status == "ok"
    assert record.passed
    assert record.weyl_norm < 1e-10
    assert record.sigma_norms == {}


def test_planar_sample_reports_liouville_and_sigma():
    """Bol's web has flat pencils but a nonzero Sigma(5)."""
    spec = builtin_spec("bol")
    record = evaluate_sample(spec.to_web(), spec.base_point)
    assert record.status == "ok"
    assert set(record.liouville) == {"Pi_112", "Pi_212"}
    assert max(record.liouville.values()) < 1e-8
    assert record.sigma_norms["5"] > 1e-3
    assert record.passed is False


def test_degenerate_sample_is_skipped(caplog):
    """Poles of the expressions give a skipped record instead of an error."""
    spec = builtin_spec("bol")
    with caplog.at_level(logging.WARNING):
        record = evaluate_sample(spec.to_web(), [0.5, 1.0])
    assert record.status == "skipped"
    assert record.passed is None
    assert "Skipping sample" in caplog.text


def test_general_position_failure_is_skipped():
    """Repeated foliations are reported as not in general position."""
    spec = random_linear_spec(2, 4, seed=1)
    spec.foliations[1] = spec.foliations[0]
    record = evaluate_sample(spec.to_web(), spec.base_point)
    assert record.status == "skipped"
    assert "general position" in record.message


def test_tensoriality_of_matching_maps():
    """W and Sigma(6) pull back to the tensors of the original web."""
    phi, phi_inv = diffeo_fields(3)
    result = tensoriality_check(_tensor_web(), phi, phi_inv, [0.3, 0.2, 0.1])
    assert not result.flagged
    assert result.deviation < 1e-6


def test_tensoriality_flags_mismatched_maps(caplog):
    """A wrong inverse map is detected and logged."""
    phi, _ = diffeo_fields(3)
    not_inverse = parse_fields(["x", "y", "z"], nvars=3)
    with caplog.at_level(logging.WARNING):
        result = tensoriality_check(_tensor_web(), phi, not_inverse, [0.3, 0.2, 0.1])
    assert result.flagged
    assert result.deviation == pytest.approx(max(result.weyl_deviation, result.sigma_deviation))
    assert "Tensoriality deviation" in caplog.text


@pytest.mark.parametrize(("name", "expected"), [("linear5_c3", True), ("bol", False)])
def test_complex_scalars_keep_the_verdict(monkeypatch, name, expected):
    """Complex jet coefficients give the same verdict as real ones."""
    monkeypatch.setattr(settings, "complex_scalars", True)
    spec = builtin_spec(name)
    web = spec.to_web()
    assert web.slopes_at(spec.base_point, 1).slopes[0][0, 0].coeffs.dtype == np.complex128
    record = evaluate_sample(web, spec.base_point)
    assert record.status == "ok"
    assert record.passed is expected


def test_w8_sample_depends_on_eps():
    """W8 is linearizable for eps = 1 and curved otherwise."""
    flat = builtin_spec("w8", {"eps": 1.0})
    record = evaluate_sample(flat.to_web(), flat.base_point)
    assert record.status == "ok"
    assert record.passed
    assert record.residual < 1e-8

    curved = builtin_spec("w8", {"eps": 0.5})
    record = evaluate_sample(curved.to_web(), curved.base_point)
    assert record.status == "ok"
    assert record.passed is False
    assert record.residual > 1e-3
