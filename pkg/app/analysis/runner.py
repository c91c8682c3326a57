"""
Runner for linearizability analyses.

This module evaluates the sample points of an analysis concurrently using
asyncio: each point is an independent job run in a worker thread, bounded
by a semaphore, and the report is assembled once every job is done.
"""

import asyncio
import os
from typing import Optional, Sequence

from app.analysis.schemas import AnalysisConfig
from app.analysis.verdict import evaluate_sample, summarize
from app.core.exceptions import UnderdeterminedWeb
from app.core.logging_config import logger
from app.core.utils import sample_points
from app.geometry.tensors import equation_count, unknown_count
from app.response_models import LinearizabilityReport, SampleRecord
from app.webs.model import Web


async def run_samples(
    web: Web, points: Sequence[Sequence[float]], config: AnalysisConfig
) -> list[SampleRecord]:
    """Evaluate every sample point concurrently, keeping the input order."""
    semaphore = asyncio.Semaphore(config.jobs or os.cpu_count() or 1)

    async def run_one(point):
        async with semaphore:
            return await asyncio.to_thread(
                evaluate_sample,
                web,
                point,
                config.order,
                config.tolerance,
                config.residual_tol,
                config.seed,
            )

    tasks = [run_one(point) for point in points]
    return list(await asyncio.gather(*tasks))


def verdict(
    web: Web,
    config: Optional[AnalysisConfig] = None,
    points: Optional[Sequence[Sequence[float]]] = None,
) -> LinearizabilityReport:
    """
    Decide whether ``web`` is linearizable.

    Args:
        web (Web): The web.
        config (Optional[AnalysisConfig]): Analysis settings; its base point
            is required unless ``points`` is given.
        points (Optional[Sequence[Sequence[float]]]): Explicit sample points.

    Returns:
        LinearizabilityReport: Per-point records and the global verdict.

    Raises:
        UnderdeterminedWeb: The web has fewer equations than unknowns.
    """
    config = config or AnalysisConfig()
    n = web.dimension
    equations, unknowns = equation_count(n, web.codims), unknown_count(n)
    if equations < unknowns:
        raise UnderdeterminedWeb(equations, unknowns)
    if points is None:
        if config.base_point is None:
            raise ValueError("a base point is required to draw sample points")
        points = sample_points(config.base_point, config.samples, config.radius, config.seed)

    records = asyncio.run(run_samples(web, points, config))
    outcome, exit_code, skipped = summarize(records)
    logger.info(
        f"Web '{web.label}': {outcome} ({len(records) - skipped} samples evaluated, "
        f"{skipped} skipped)"
    )
    return LinearizabilityReport(
        label=web.label,
        dimension=n,
        codims=list(web.codims),
        equations=equations,
        unknowns=unknowns,
        order=config.order,
        tolerance=config.tolerance,
        residual_tol=config.residual_tol,
        samples=records,
        skipped=skipped,
        verdict=outcome,
        exit_code=exit_code,
    )
