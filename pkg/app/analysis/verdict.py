"""
Linearizability verdict at sample points.

A web is declared linearizable when, at every sample point, its compatible
connection exists (consistency residual below tolerance), is flat (Weyl
tensor for ``n > 2``, ``Pi_{112}`` and ``Pi_{212}`` for ``n = 2``) and, for
hypersurface webs with more than ``n + 2`` foliations, every ``Sigma(l)``
vanishes. Norms are divided by ``1 + max |Pi|`` to be dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    DivisionByNonUnit,
    DomainError,
    SingularAtPoint,
    TransversalityFailure,
)
from app.core.logging_config import logger
from app.dsl.field import ScalarField
from app.geometry.connection import sigma, solve_framed
from app.geometry.curvature import liouville_components, tensors
from app.geometry.tensors import max_abs, transform_tensor
from app.response_models import SampleRecord
from app.webs.model import Web, general_position_check, pushforward

SKIPPABLE = (SingularAtPoint, TransversalityFailure, DivisionByNonUnit, DomainError)


def _user_scale(thomas_const: np.ndarray, frame) -> float:
    return 1.0 + max_abs(transform_tensor(thomas_const, frame.inverse, up=1))


def evaluate_sample(
    web: Web,
    x0: Sequence[float],
    order: Optional[int] = None,
    tol: Optional[float] = None,
    residual_tol: Optional[float] = None,
    seed: Optional[int] = None,
) -> SampleRecord:
    """
    Run every applicable test at one point.

    Degenerate points (singular systems, failed transversality, poles of the
    expressions, general position failures) are returned as skipped records.
    """
    order = settings.jet_order if order is None else order
    tol = settings.tolerance if tol is None else tol
    residual_tol = settings.residual_tol if residual_tol is None else residual_tol
    n, d = web.dimension, len(web.foliations)
    point = [float(v) for v in x0]
    try:
        framed = web.slopes_at(x0, order, seed=seed)
        position = general_position_check(web, x0, framed=framed)
        if not position.passed:
            return SampleRecord(
                point=point,
                status="skipped",
                frame=framed.frame.index,
                message=f"not in general position ({position.kind} {position.witness})",
            )
        sigma_norms = {}
        if web.is_codim1 and d > n + 2:
            connection = solve_framed(web, framed, list(range(n + 2)))
            scale = _user_scale(connection.thomas.constant(), framed.frame)
            for ell in range(n + 3, d + 1):
                tensor = sigma(web, ell, framed=framed, reference=connection)
                user = transform_tensor(tensor.constant(), framed.frame.inverse, up=1)
                sigma_norms[str(ell)] = max_abs(user) / scale
        else:
            connection = solve_framed(web, framed)
            scale = _user_scale(connection.thomas.constant(), framed.frame)
        curvature = tensors(connection.thomas)
    except SKIPPABLE as exc:
        logger.warning(f"Skipping sample {point}: {exc}")
        return SampleRecord(point=point, status="skipped", message=str(exc))

    record = SampleRecord(
        point=point,
        frame=framed.frame.index,
        residual=connection.residual,
        thomas_norm=scale - 1.0,
        sigma_norms=sigma_norms,
    )
    passed = connection.residual < residual_tol and all(v < tol for v in sigma_norms.values())
    if n > 2:
        weyl = transform_tensor(curvature.weyl[..., 0], framed.frame.inverse, up=1)
        record.weyl_norm = max_abs(weyl) / scale
        # diagnostic only, not part of the n > 2 verdict
        lv = transform_tensor(curvature.liouville[..., 0], framed.frame.inverse, up=0)
        record.liouville = {"Pi_iuv": max_abs(lv) / scale}
        passed = passed and record.weyl_norm < tol
    else:
        components = liouville_components(curvature, framed.frame.inverse)
        record.liouville = {key: value / scale for key, value in components.items()}
        passed = passed and all(v < tol for v in record.liouville.values())
    record.passed = bool(passed)
    logger.debug(f"Sample {point}: {record.model_dump(exclude={'point'})}")
    return record


def summarize(records: Sequence[SampleRecord]) -> tuple[str, int, int]:
    """Return ``(verdict, exit_code, skipped)`` for a list of sample records."""
    skipped = sum(1 for r in records if r.status == "skipped")
    if any(r.passed is False for r in records):
        return "not_linearizable", 1, skipped
    if skipped:
        return "inconclusive", 2, skipped
    return "linearizable", 0, skipped


@dataclass(frozen=True)
class TensorialityResult:
    """
    Deviation between tensors of a web and the pull-back of its image's tensors.

    Attributes:
        weyl_deviation (float): Scaled max deviation of ``W``.
        sigma_deviation (float): Scaled max deviation of the ``Sigma(l)``.
        deviation (float): Largest of the two.
        flagged (bool): Whether the deviation exceeds the threshold.
    """

    weyl_deviation: float
    sigma_deviation: float
    deviation: float
    flagged: bool


def _jacobian(fields: Sequence[ScalarField], point: Sequence[float]) -> np.ndarray:
    return np.real([f.eval_jet(point, 1).gradient() for f in fields])


def _user_tensors(web: Web, x0, order) -> tuple[np.ndarray, list[np.ndarray]]:
    n, d = web.dimension, len(web.foliations)
    framed = web.slopes_at(x0, order)
    frame = framed.frame
    sigmas = []
    if web.is_codim1 and d > n + 2:
        connection = solve_framed(web, framed, list(range(n + 2)))
        for ell in range(n + 3, d + 1):
            tensor = sigma(web, ell, framed=framed, reference=connection)
            sigmas.append(transform_tensor(tensor.constant(), frame.inverse, up=1))
    else:
        connection = solve_framed(web, framed)
    weyl = transform_tensor(tensors(connection.thomas).weyl[..., 0], frame.inverse, up=1)
    return weyl, sigmas


def tensoriality_check(
    web: Web,
    phi: Sequence[ScalarField],
    phi_inv: Sequence[ScalarField],
    x0: Sequence[float],
    order: Optional[int] = None,
    threshold: float = 1e-6,
) -> TensorialityResult:
    """
    Compare ``W`` and ``Sigma`` of ``web`` at ``x0`` with those of its image.

    The image web is ``pushforward(web, phi_inv)`` evaluated at ``phi(x0)``;
    its tensors are pulled back with ``D phi_inv`` on upper indices and
    ``D phi`` on lower indices.
    """
    order = settings.jet_order if order is None else order
    y0 = [f.value_at(x0) for f in phi]
    to_image = _jacobian(phi, x0)
    from_image = _jacobian(phi_inv, y0)

    weyl, sigmas = _user_tensors(web, x0, order)
    image_weyl, image_sigmas = _user_tensors(pushforward(web, phi_inv), y0, order)
    pulled = np.einsum(
        "ia,abcd,bj,ck,dl->ijkl", from_image, image_weyl, to_image, to_image, to_image
    )
    weyl_dev = max_abs(pulled - weyl) / (1.0 + max_abs(weyl))
    sigma_dev = 0.0
    for mine, theirs in zip(sigmas, image_sigmas):
        back = np.einsum("ia,abc,bj,ck->ijk", from_image, theirs, to_image, to_image)
        sigma_dev = max(sigma_dev, max_abs(back - mine) / (1.0 + max_abs(mine)))
    deviation = max(weyl_dev, sigma_dev)
    flagged = deviation > threshold
    if flagged:
        logger.warning(
            f"Tensoriality deviation {deviation:.3e} for '{web.label}' at {list(x0)}; "
            "check that the inverse map really inverts the map"
        )
    return TensorialityResult(weyl_dev, sigma_dev, deviation, flagged)
