"""
Utility functions shared across the application.

This module provides sample-point generation and small parsing helpers
reused by the analysis runner and the command line.
"""

from typing import Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import InputError


def sample_points(
    base: Sequence[float],
    count: Optional[int] = None,
    radius: Optional[float] = None,
    seed: Optional[int] = None,
) -> list[np.ndarray]:
    """
    Draw sample points around a base point.

    Args:
        base (Sequence[float]): The base point, always the first sample.
        count (Optional[int]): Total number of points.
            Defaults to settings.samples.
        radius (Optional[float]): Radius of the sampling ball.
            Defaults to settings.radius.
        seed (Optional[int]): RNG seed. Defaults to settings.seed.

    Returns:
        list[np.ndarray]: ``count`` points, uniformly distributed in the ball
        apart from the base point itself.
    """
    count = settings.samples if count is None else count
    radius = settings.radius if radius is None else radius
    seed = settings.seed if seed is None else seed
    base = np.asarray(base, dtype=float)
    rng = np.random.default_rng(seed)
    points = [base.copy()]
    for _ in range(count - 1):
        direction = rng.normal(size=base.shape)
        direction /= np.linalg.norm(direction)
        scale = radius * rng.uniform() ** (1.0 / base.size)
        points.append(base + scale * direction)
    return points


def parse_point(text: str) -> list[float]:
    """Parse ``"v1,v2,..."`` into floats."""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InputError(f"invalid point '{text}': {exc}") from exc


def parse_constants(items: Optional[Sequence[str]]) -> dict[str, float]:
    """Parse repeated ``name=value`` options."""
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise InputError(f"constant '{item}' is not of the form name=value")
        try:
            out[name.strip()] = float(value)
        except ValueError as exc:
            raise InputError(f"constant '{item}' has a non-numeric value") from exc
    return out
