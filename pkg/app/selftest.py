"""
Acceptance suite runnable from the command line.

Each criterion is a function returning ``(passed, detail)``; the runner
times it, turns exceptions into failures and logs one PASS/FAIL line.
"""

import time
from typing import Callable, Optional, Sequence

import numpy as np

from app.analysis.runner import verdict
from app.analysis.schemas import AnalysisConfig
from app.analysis.verdict import evaluate_sample, tensoriality_check
from app.core.exceptions import InputError, WebLinearizationError
from app.core.logging_config import logger
from app.dsl.field import parse_fields
from app.geometry.connection import (
    ThomasSymbols,
    abcd_to_thomas,
    cubic_ode_residual,
    mixed_determinant_ratio,
    solve_canonical,
    thomas_to_abcd,
)
from app.geometry.curvature import tensors
from app.geometry.leaves import geodesic_residual
from app.geometry.tensors import unknown_count
from app.jets.basis import basis_size
from app.response_models import SelfTestResult
from app.webs.builtins import (
    XYZ,
    builtin_spec,
    diffeo_fields,
    linear_form_text,
    list_builtins,
    paper_mw_check,
    random_linear_spec,
)
from app.webs.model import Web, affine_image, foliation_from_first_integrals, pushforward

W8_RESIDUAL_THRESHOLD = 1e-3
BOL_SIGMA_THRESHOLD = 1e-3

# near-identity affine map for the invariance criterion; n = 2 uses the top-left block
INVARIANCE_MATRIX = np.array([[1.0, 0.2, -0.1], [0.3, 1.0, 0.2], [-0.2, 0.1, 1.0]])
INVARIANCE_SHIFT = np.array([0.1, -0.2, 0.05])

# nonlinear hypersurface 6-web with nonzero W and Sigma(6)
TENSOR_WEB = (
    "z + 0.3*x^2",
    "x + y + z + 0.2*y*z",
    "x - y + 2*z",
    "x + 2*y - z + 0.1*x*y",
    "2*x - y - z",
    "x + 3*y + z + 0.5*x*z",
)

Outcome = tuple[bool, str]
Variant = tuple[Web, list[float], Optional[int]]


def _web(spec) -> Web:
    return spec.to_web()


def check_det_n3() -> Outcome:
    """``det(M_W) = 4 * prod of triple wedges`` at 100 random slope pairs."""
    ratios = np.array([r.ratio for r in paper_mw_check(seed=0, trials=100)])
    error = float(np.max(np.abs(ratios - 4.0)) / 4.0)
    return error < 1e-8, f"max relative error {error:.2e} over {ratios.size} pairs"


def check_flat_baseline() -> Outcome:
    """Random linear (n+2)-webs have zero Thomas coefficients and are linearizable."""
    worst, failures = 0.0, 0
    for n in (2, 3, 4):
        for seed in range(20):
            spec = random_linear_spec(n, n + 2, seed)
            record = evaluate_sample(_web(spec), spec.base_point)
            if record.status != "ok" or not record.passed:
                failures += 1
                continue
            worst = max(worst, record.thomas_norm)
    return failures == 0 and worst < 1e-10, f"max |Pi| {worst:.2e}, {failures} failures"


def check_diffeo_flat() -> Outcome:
    """Pushed-forward linear webs have nonzero Pi but flat curvature."""
    details, ok = [], True
    for n, x0 in ((2, [0.3, 0.2]), (3, [0.3, 0.2, 0.1])):
        phi, phi_inv = diffeo_fields(n)
        linear = _web(random_linear_spec(n, n + 2, seed=11))
        image = pushforward(linear, phi_inv)
        y0 = [f.value_at(x0) for f in phi]
        report = verdict(image, AnalysisConfig(samples=7, base_point=y0))
        thomas = report.samples[0].thomas_norm or 0.0
        ok = ok and report.verdict == "linearizable" and thomas > 1e-2
        details.append(f"n={n}: {report.verdict}, |Pi| {thomas:.2e}")
    return ok, "; ".join(details)


def check_w8_sweep() -> Outcome:
    """The curve 8-web has a compatible connection exactly for eps = 1."""
    details, ok = [], True
    for eps in (1.0, 0.5, 2.0):
        spec = builtin_spec("w8", {"eps": eps})
        config = AnalysisConfig(samples=5, base_point=spec.base_point)
        report = verdict(_web(spec), config)
        residual = report.samples[0].residual
        shown = float("nan") if residual is None else residual
        if eps == 1.0:
            ok = ok and report.verdict == "linearizable"
            ok = ok and all((r.residual or 0.0) < 1e-8 for r in report.samples)
        else:
            ok = ok and report.verdict == "not_linearizable"
            ok = ok and residual is not None and residual > W8_RESIDUAL_THRESHOLD
        details.append(f"eps={eps}: {report.verdict}, residual {shown:.2e}")
    return ok, "; ".join(details)


def check_bol() -> Outcome:
    """The four pencils of Bol's web are flat while Sigma(5) is not zero."""
    spec = builtin_spec("bol")
    report = verdict(_web(spec), AnalysisConfig(samples=5, base_point=spec.base_point))
    ok_samples = [r for r in report.samples if r.status == "ok"]
    liouville = max((v for r in ok_samples for v in r.liouville.values()), default=np.inf)
    sigma5 = min((r.sigma_norms.get("5", 0.0) for r in ok_samples), default=0.0)
    ok = (
        bool(ok_samples)
        and liouville < 1e-8
        and sigma5 > BOL_SIGMA_THRESHOLD
        and report.verdict == "not_linearizable"
    )
    return ok, f"{report.verdict}, max Liouville {liouville:.2e}, min |Sigma(5)| {sigma5:.2e}"


def check_mixed6_det() -> Outcome:
    """The mixed 6-web determinant factors with a constant ratio."""
    rng = np.random.default_rng(6)
    ratios = []
    for seed in range(20):
        spec = builtin_spec("mixed6_c3", seed=seed)
        x0 = np.array(spec.base_point) + rng.uniform(-0.1, 0.1, 3)
        ratios.append(mixed_determinant_ratio(_web(spec), x0).ratio)
    ratios = np.array(ratios)
    spread = float((ratios.max() - ratios.min()) / abs(ratios.mean()))
    return spread < 1e-6, f"ratio {ratios.mean():.6g}, relative spread {spread:.2e}"


def check_bianchi() -> Outcome:
    """The cyclic sum of W vanishes for random trace-free Thomas jets."""
    rng = np.random.default_rng(7)
    worst = 0.0
    for trial in range(50):
        n = 3 + trial % 2
        values = rng.normal(size=(unknown_count(n), basis_size(n, 2)))
        curv = tensors(ThomasSymbols.from_free(values, n, 2))
        scale = float(np.max(np.abs(curv.weyl[..., 0])))
        worst = max(worst, curv.bianchi_residual() / scale)
    return worst < 1e-9, f"max relative cyclic sum {worst:.2e}"


def _affine_pair(rng: np.random.Generator) -> tuple[list[str], list[str]]:
    # unimodular integer matrices keep the printed inverse exact
    lower = np.eye(3) + np.tril(rng.integers(-1, 2, size=(3, 3)), -1)
    upper = np.eye(3) + np.triu(rng.integers(-1, 2, size=(3, 3)), 1)
    matrix = rng.permutation(np.eye(3)) @ lower @ upper
    inverse = np.round(np.linalg.inv(matrix))
    shift = np.round(rng.uniform(-1.0, 1.0, 3), 2)
    phi = [linear_form_text(row, XYZ, offset=t) for row, t in zip(matrix, shift)]
    back = [linear_form_text(row, XYZ, offset=-(row @ shift)) for row in inverse]
    return phi, back


def check_tensoriality() -> Outcome:
    """W and Sigma transform as tensors under affine and nonlinear maps."""
    fields = parse_fields(TENSOR_WEB, nvars=3)
    web = Web(3, tuple(foliation_from_first_integrals([f], 3) for f in fields), "tensor-test")
    x0 = [0.3, 0.2, 0.1]
    rng = np.random.default_rng(8)
    affine = 0.0
    for _ in range(10):
        phi, back = _affine_pair(rng)
        result = tensoriality_check(
            web, parse_fields(phi, nvars=3), parse_fields(back, nvars=3), x0, threshold=1e-8
        )
        affine = max(affine, result.deviation)
    phi, phi_inv = diffeo_fields(3)
    nonlinear = tensoriality_check(web, phi, phi_inv, x0, threshold=1e-6).deviation
    ok = affine < 1e-8 and nonlinear < 1e-6
    return ok, f"affine {affine:.2e}, nonlinear {nonlinear:.2e}"


def check_planar_anchor() -> Outcome:
    """ABCD and Thomas coefficients agree; planar slopes solve the cubic ODE."""
    rng = np.random.default_rng(9)
    roundtrip = 0.0
    for n in (2, 3, 4):
        for _ in range(5):
            values = rng.normal(size=(unknown_count(n), basis_size(n, 2)))
            thomas = ThomasSymbols.from_free(values, n, 2)
            back = abcd_to_thomas(thomas_to_abcd(thomas))
            roundtrip = max(roundtrip, float(np.max(np.abs(back - thomas))))

    exprs = []
    for _ in range(4):
        a, b = np.round(rng.uniform(-2.0, 2.0, 2), 2)
        bend = np.round(rng.uniform(-0.5, 0.5, 2), 2)
        exprs.append(f"{linear_form_text([a, b], XYZ)} + ({linear_form_text(bend, XYZ)})^2")
    fields = parse_fields(exprs, nvars=2)
    web = Web(2, tuple(foliation_from_first_integrals([f], 2) for f in fields), "planar-4")
    connection = solve_canonical(web, [0.2, -0.1], order=4)
    ode = max(
        cubic_ode_residual(connection.thomas, omega).max_abs()
        for omega in connection.framed.slopes
    )
    ok = roundtrip < 1e-12 and ode < 1e-9
    return ok, f"roundtrip {roundtrip:.2e}, cubic ODE residual {ode:.2e}"


def check_geodesic_leaves() -> Outcome:
    """Traced leaves of builtin webs are totally geodesic for their connection."""
    worst, details = 0.0, []
    for name in ("linear5_c3", "linear_pushforward_n2", "w8", "mixed6_c3"):
        spec = builtin_spec(name)
        residuals = geodesic_residual(_web(spec), spec.base_point, steps=100)
        value = max(r.residual for r in residuals)
        worst = max(worst, value)
        details.append(f"{name} {value:.1e}")
    return worst <= 1e-6, ", ".join(details)


def invariance_variants(web: Web, x0: Sequence[float]) -> dict[str, Variant]:
    """Reordered, reseeded and affinely moved copies of a web with their base points."""
    n = web.dimension
    matrix, shift = INVARIANCE_MATRIX[:n, :n], INVARIANCE_SHIFT[:n]
    point = list(x0)
    return {
        "original": (web, point, None),
        "reversed": (web.subweb(range(len(web.foliations))[::-1]), point, None),
        "seed": (web, point, 17),
        "affine": (affine_image(web, matrix, shift), list(matrix @ np.asarray(x0) + shift), None),
    }


def check_invariance() -> Outcome:
    """Verdicts of builtin webs survive reordering, reseeding and affine changes."""
    details, ok = [], True
    for builtin in list_builtins():
        if not builtin.is_web:
            continue
        spec = builtin_spec(builtin.name)
        variants = invariance_variants(_web(spec), spec.base_point)
        verdicts = {
            key: evaluate_sample(web, x0, seed=seed).passed
            for key, (web, x0, seed) in variants.items()
        }
        agree = len(set(verdicts.values())) == 1 and verdicts["original"] is not None
        ok = ok and agree
        suffix = "" if agree else f" (differs: {verdicts})"
        details.append(f"{builtin.name} {verdicts['original']}{suffix}")
    return ok, ", ".join(details)


CRITERIA: dict[str, Callable[[], Outcome]] = {
    "det_n3": check_det_n3,
    "flat_baseline": check_flat_baseline,
    "diffeo_flat": check_diffeo_flat,
    "w8_sweep": check_w8_sweep,
    "bol": check_bol,
    "mixed6_det": check_mixed6_det,
    "bianchi": check_bianchi,
    "tensoriality": check_tensoriality,
    "planar_anchor": check_planar_anchor,
    "geodesic_leaves": check_geodesic_leaves,
    "invariance": check_invariance,
}


def run_criterion(name: str) -> SelfTestResult:
    """Run one criterion, turning library errors into a failure."""
    start = time.perf_counter()
    try:
        passed, detail = CRITERIA[name]()
    except WebLinearizationError as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    seconds = time.perf_counter() - start
    status = "PASS" if passed else "FAIL"
    logger.info(f"{status} {name} ({seconds:.2f}s): {detail}")
    return SelfTestResult(name=name, passed=bool(passed), detail=detail, seconds=seconds)


def run_selftest(names: Optional[Sequence[str]] = None) -> list[SelfTestResult]:
    """
    Run the named criteria, or all of them.

    Raises:
        InputError: A requested criterion does not exist.
    """
    names = list(names) if names else list(CRITERIA)
    unknown = [n for n in names if n not in CRITERIA]
    if unknown:
        raise InputError(
            f"unknown criteria {', '.join(unknown)} (available: {', '.join(CRITERIA)})"
        )
    return [run_criterion(name) for name in names]
