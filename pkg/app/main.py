"""
Main entry point for the ``weblin`` command line.

This module parses the command line, dispatches to the analysis, builtin and
self-test commands, and maps exceptions to exit codes: 0 linearizable,
1 not linearizable, 2 inconclusive or degenerate, 3 input error.
"""

import argparse
import json
import sys
import traceback
import uuid
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from app.analysis.runner import verdict
from app.analysis.schemas import AnalysisConfig
from app.core.config import settings
from app.core.exceptions import DSLSyntaxError, InputError, WebLinearizationError
from app.core.logging_config import logger, set_verbose
from app.core.utils import parse_constants, parse_point
from app.response_models import LinearizabilityReport
from app.selftest import CRITERIA, run_selftest
from app.webs.builtins import builtin_spec, get_builtin, list_builtins, paper_mw_check
from app.webs.schemas import WebSpec, load_web_spec

MW_TOLERANCE = 1e-8


def load_target(target: str, constants: dict[str, float], seed: int) -> WebSpec:
    """Load a web description file, or build a builtin when no such file exists."""
    path = Path(target)
    if path.is_file():
        return load_web_spec(path.read_text(encoding="utf-8"))
    return builtin_spec(target, constants, seed)


def render_text(report: LinearizabilityReport) -> str:
    """Human readable rendering of a report; the JSON form is the stable one."""
    lines = [
        f"web: {report.label} (n = {report.dimension}, codims {report.codims})",
        f"system: {report.equations} equations, {report.unknowns} unknowns, "
        f"slope order {report.order}",
    ]
    for pos, record in enumerate(report.samples, start=1):
        point = ", ".join(f"{v:.4g}" for v in record.point)
        if record.status == "skipped":
            lines.append(f"  [{pos}] ({point}) skipped: {record.message}")
            continue
        parts = [f"frame {record.frame}", f"residual {record.residual:.2e}"]
        parts.append(f"|Pi| {record.thomas_norm:.2e}")
        if record.weyl_norm is not None:
            parts.append(f"|W| {record.weyl_norm:.2e}")
        parts += [f"|{k}| {v:.2e}" for k, v in record.liouville.items()]
        parts += [f"|Sigma({k})| {v:.2e}" for k, v in record.sigma_norms.items()]
        status = "ok" if record.passed else "FAIL"
        lines.append(f"  [{pos}] ({point}) {status}: " + ", ".join(parts))
    lines.append(f"verdict: {report.verdict} (exit {report.exit_code})")
    return "\n".join(lines)


def cmd_analyze(args: argparse.Namespace) -> int:
    """Analyze a web file or builtin and print its report."""
    constants = parse_constants(args.const)
    spec = load_target(args.target, constants, args.seed or settings.seed)
    base_point = parse_point(args.point) if args.point else spec.base_point
    if base_point is None:
        raise InputError("no base point: pass --point or set base_point in the description")
    if len(base_point) != spec.dimension:
        raise InputError(f"base point has {len(base_point)} coordinates, expected {spec.dimension}")
    try:
        config = AnalysisConfig(
            order=args.order,
            tolerance=args.tol,
            samples=args.samples,
            radius=args.radius,
            seed=args.seed,
            base_point=base_point,
            output_format=args.format,
            jobs=args.jobs,
        )
    except ValidationError as exc:
        raise InputError(f"invalid analysis settings: {exc}") from exc
    report = verdict(spec.to_web(constants), config)
    if config.output_format == "json":
        print(report.model_dump_json(indent=2))
    else:
        print(render_text(report))
    return report.exit_code


def cmd_examples_list(args: argparse.Namespace) -> int:
    """Print the builtin names."""
    for builtin in list_builtins():
        print(f"{builtin.name:24s}{builtin.description}")
    return 0


def cmd_examples_show(args: argparse.Namespace) -> int:
    """Print the JSON description of a builtin web, or run a builtin check."""
    builtin = get_builtin(args.name)
    seed = settings.seed if args.seed is None else args.seed
    if builtin.is_web:
        spec = builtin_spec(args.name, parse_constants(args.const), seed)
        print(spec.model_dump_json(indent=2, exclude_none=True))
        return 0
    ratios = [r.ratio for r in paper_mw_check(seed)]
    worst = max(abs(r - 4.0) / 4.0 for r in ratios)
    print(f"det(M_W) / prod(wedges): min {min(ratios):.12g}, max {max(ratios):.12g}")
    print(f"max relative deviation from 4: {worst:.2e} over {len(ratios)} slope pairs")
    return 0 if worst < MW_TOLERANCE else 1


def cmd_selftest(args: argparse.Namespace) -> int:
    """Run the acceptance criteria and print one line per criterion."""
    results = run_selftest(args.filter)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name} ({result.seconds:.2f}s) {result.detail}")
    return 0 if all(r.passed for r in results) else 1


def cmd_schema(args: argparse.Namespace) -> int:
    """Print the JSON schema of analysis reports."""
    print(json.dumps(LinearizabilityReport.model_json_schema(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser of the ``weblin`` command."""
    parser = argparse.ArgumentParser(
        prog="weblin",
        description="Decide whether a web of foliations is linearizable.",
    )
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="analyze a web file or builtin")
    analyze.add_argument("target", help="path to a JSON web description or a builtin name")
    analyze.add_argument("--order", type=int, help="slope jet order (at least 3)")
    analyze.add_argument("--tol", type=float, help="curvature tolerance")
    analyze.add_argument("--samples", type=int, help="number of sample points")
    analyze.add_argument("--radius", type=float, help="radius of the sampling ball")
    analyze.add_argument("--seed", type=int, help="seed of samples and generic frames")
    analyze.add_argument("--point", help='base point "v1,v2,..."')
    analyze.add_argument("--const", action="append", help="constant name=value (repeatable)")
    analyze.add_argument("--format", choices=("text", "json"), default="text")
    analyze.add_argument("--jobs", type=int, help="concurrent sample points")
    analyze.set_defaults(handler=cmd_analyze)

    examples = commands.add_parser("examples", help="list or show builtin examples")
    actions = examples.add_subparsers(dest="action", required=True)
    actions.add_parser("list", help="list builtin names").set_defaults(handler=cmd_examples_list)
    show = actions.add_parser("show", help="print a builtin description")
    show.add_argument("name")
    show.add_argument("--const", action="append", help="constant name=value (repeatable)")
    show.add_argument("--seed", type=int, help="seed of randomized builtins")
    show.set_defaults(handler=cmd_examples_show)

    selftest = commands.add_parser("selftest", help="run the acceptance criteria")
    selftest.add_argument(
        "--filter", action="append", metavar="NAME", help=f"one of: {', '.join(CRITERIA)}"
    )
    selftest.set_defaults(handler=cmd_selftest)

    commands.add_parser("schema", help="print the report JSON schema").set_defaults(
        handler=cmd_schema
    )
    return parser


def _report_error(exc: WebLinearizationError) -> None:
    logger.error(f"{type(exc).__name__}: {exc}")
    print(f"error: {exc}", file=sys.stderr)
    if isinstance(exc, DSLSyntaxError) and exc.text:
        prefix = exc.text.encode("utf-8")[: exc.offset].decode("utf-8", errors="ignore")
        print(f"  {exc.text}\n  {' ' * len(prefix)}^", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line and return its exit code.

    Args:
        argv (Optional[Sequence[str]]): Arguments, ``sys.argv[1:]`` by default.

    Returns:
        int: The exit code of the command.
    """
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_verbose(True)
    try:
        return args.handler(args)
    except WebLinearizationError as exc:
        _report_error(exc)
        return exc.exit_code
    except Exception as exc:
        incident_id = str(uuid.uuid4())
        logger.error(f"Unexpected error: {exc}. Reference ID: {incident_id}")
        logger.error(traceback.format_exc())
        print(f"error: unexpected failure, reference ID {incident_id}", file=sys.stderr)
        return InputError.exit_code


def run() -> None:
    """Console script entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()
