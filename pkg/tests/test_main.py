"""
Test suite for the ``weblin`` command line.

Tests:
- `test_examples_list`: Lists every builtin.
- `test_examples_show`: Prints a builtin description that validates again.
- `test_examples_show_check`: Runs the determinant identity builtin.
- `test_schema`: Prints the report JSON schema.
- `test_analyze_*`: Exit codes of analyses of builtins and files.
- `test_input_errors`: Malformed inputs exit with 3 and explain why.
- `test_unexpected_error`: Unexpected failures are logged with an incident id.
- `test_selftest_filter`: Runs a single acceptance criterion.
"""

import json
import logging

import pytest

from app import selftest
from app.main import main, render_text
from app.response_models import LinearizabilityReport, SampleRecord
from app.webs.schemas import WebSpec


def test_examples_list(capsys):
    """Every builtin name is printed."""
    assert main(["examples", "list"]) == 0
    out = capsys.readouterr().out
    for name in ("linear5_c3", "linear_pushforward_n2", "bol", "w8", "mixed6_c3"):
        assert name in out
    assert "paper_mw_check" in out


def test_examples_show(capsys):
    """The printed description is a valid web file."""
    assert main(["examples", "show", "w8", "--const", "eps=0.5"]) == 0
    spec = WebSpec.model_validate_json(capsys.readouterr().out)
    assert len(spec.foliations) == 8
    assert spec.constants == {"eps": 0.5}


def test_examples_show_check(capsys):
    """The determinant check prints the ratio and passes."""
    assert main(["examples", "show", "paper_mw_check"]) == 0
    out = capsys.readouterr().out
    assert "max relative deviation from 4" in out


def test_schema(capsys):
    """The schema describes reports."""
    assert main(["schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert "verdict" in schema["properties"]
    assert "SampleRecord" in schema["$defs"]


def test_analyze_linear_builtin(capsys):
    """A linear web exits with 0 and a JSON report."""
    assert main(["analyze", "linear5_c3", "--samples", "2", "--format", "json"]) == 0
    report = LinearizabilityReport.model_validate_json(capsys.readouterr().out)
    assert report.verdict == "linearizable"
    assert len(report.samples) == 2


def test_analyze_bol(capsys):
    """Bol's web exits with 1 and shows its Sigma(5) norm."""
    assert main(["analyze", "bol", "--samples", "2"]) == 1
    out = capsys.readouterr().out
    assert "Sigma(5)" in out
    assert "verdict: not_linearizable" in out


@pytest.mark.parametrize("eps,code", [("1", 0), ("0.5", 1)])
def test_analyze_w8(eps, code):
    """The curve 8-web is linearizable only for eps = 1."""
    assert main(["analyze", "w8", "--const", f"eps={eps}", "--samples", "2"]) == code


def test_analyze_file(tmp_path, capsys):
    """Web files are read from disk; --point overrides their base point."""
    path = tmp_path / "planes.json"
    path.write_text(
        json.dumps(
            {
                "dimension": 2,
                "foliations": [
                    {"kind": "first_integrals", "exprs": [e]}
                    for e in ("x + y", "x - y", "x + 2*y", "y")
                ],
            }
        )
    )
    assert main(["analyze", str(path), "--point", "0.1,0.2", "--samples", "2"]) == 0
    assert "(0.1, 0.2)" in capsys.readouterr().out


@pytest.mark.parametrize(
    "args",
    [
        ["analyze", "no_such_web"],
        ["analyze", "bol", "--order", "2"],
        ["analyze", "bol", "--point", "0.1,0.2,0.3"],
        ["analyze", "bol", "--const", "eps"],
        ["selftest", "--filter", "no_such_criterion"],
    ],
)
def test_input_errors(args, capsys):
    """Bad options exit with 3 and print an error."""
    assert main(args) == 3
    assert "error:" in capsys.readouterr().err


def test_malformed_file(tmp_path, capsys):
    """Invalid JSON exits with 3."""
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["analyze", str(path)]) == 3
    assert "invalid web description" in capsys.readouterr().err


def test_syntax_error_points_at_offset(tmp_path, capsys):
    """DSL errors are shown with a caret under the offending token."""
    path = tmp_path / "typo.json"
    spec = {
        "dimension": 2,
        "base_point": [0.1, 0.2],
        "foliations": [
            {"kind": "first_integrals", "exprs": [e]} for e in ("x", "y", "x+y", "x +* y")
        ],
    }
    path.write_text(json.dumps(spec))
    assert main(["analyze", str(path)]) == 3
    err = capsys.readouterr().err
    assert "offset 3" in err
    assert "  x +* y\n     ^" in err


def test_unexpected_error(mocker, caplog, capsys):
    """Unexpected exceptions are logged with a reference id and exit with 3."""
    mocker.patch("app.main.verdict", side_effect=RuntimeError("boom"))
    with caplog.at_level(logging.ERROR):
        assert main(["analyze", "bol"]) == 3
    assert "Reference ID" in caplog.text
    assert "reference ID" in capsys.readouterr().err


def test_selftest_filter(mocker, capsys):
    """--filter runs only the named criterion."""
    spy = mocker.spy(selftest, "run_criterion")
    assert main(["selftest", "--filter", "det_n3"]) == 0
    assert spy.call_count == 1
    out = capsys.readouterr().out
    assert out.startswith("PASS det_n3")


def test_render_text():
    """Skipped samples show their reason, evaluated ones their norms."""
    report = LinearizabilityReport(
        label="demo",
        dimension=3,
        codims=[1] * 5,
        equations=15,
        unknowns=15,
        order=4,
        tolerance=1e-7,
        residual_tol=1e-6,
        samples=[
            SampleRecord(point=[0.0, 0.0, 0.0], status="skipped", message="pole"),
            SampleRecord(
                point=[0.1, 0.2, 0.3],
                frame=0,
                residual=0.0,
                thomas_norm=0.5,
                weyl_norm=1e-3,
                passed=False,
            ),
        ],
        skipped=1,
        verdict="not_linearizable",
        exit_code=1,
    )
    text = render_text(report)
    assert "skipped: pole" in text
    assert "|W| 1.00e-03" in text
    assert text.endswith("verdict: not_linearizable (exit 1)")
