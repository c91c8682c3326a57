"""
Leaf tracing and the totally-geodesic residual along leaves.

Leaves are integrated in frame coordinates as graphs over the first ``m``
coordinates with an explicit fourth-order Runge-Kutta scheme. At every
traced point the compatible connection is solved again and the
totally-geodesic equations of the foliation are evaluated there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from app.geometry.connection import assemble_geodesic_rows, solve_framed
from app.webs.model import Foliation, LinearFrame, Web


@dataclass(frozen=True)
class LeafResidual:
    """
    Worst totally-geodesic residual along a traced leaf.

    Attributes:
        foliation (int): 1-based foliation index.
        residual (float): Largest residual over the traced points.
        points (np.ndarray): Traced points in user coordinates.
    """

    foliation: int
    residual: float
    points: np.ndarray


def _velocity(foliation: Foliation, frame: LinearFrame, point: np.ndarray, a: int) -> np.ndarray:
    user = frame.inverse @ (point - frame.translation)
    omega = foliation.slopes(user, 0, frame, check_integrability=False)
    m = foliation.leaf_dim
    vel = np.zeros(len(point))
    vel[a] = 1.0
    vel[m:] = [float(np.real(omega[r, a].value)) for r in range(foliation.codim)]
    return vel


def trace_leaf(
    foliation: Foliation,
    x0: Sequence[float],
    frame: Optional[LinearFrame] = None,
    step: float = 1e-3,
    steps: int = 100,
    direction: int = 0,
) -> np.ndarray:
    """
    Integrate the leaf through ``x0`` along the ``direction``-th graph parameter.

    Returns:
        np.ndarray: ``(steps + 1, n)`` points in user coordinates.
    """
    frame = frame or LinearFrame.identity(foliation.nvars)
    point = frame.to_frame(x0)
    out = [point.copy()]
    for _ in range(steps):
        k1 = _velocity(foliation, frame, point, direction)
        k2 = _velocity(foliation, frame, point + 0.5 * step * k1, direction)
        k3 = _velocity(foliation, frame, point + 0.5 * step * k2, direction)
        k4 = _velocity(foliation, frame, point + step * k3, direction)
        point = point + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(point.copy())
    inv = frame.inverse
    return np.array([inv @ (p - frame.translation) for p in out])


def geodesic_residual(
    web: Web,
    x0: Sequence[float],
    reference: Optional[Sequence[int]] = None,
    step: float = 1e-3,
    steps: int = 100,
) -> list[LeafResidual]:
    """
    Check that traced leaves of every foliation are totally geodesic.

    Args:
        web (Web): The web.
        x0 (Sequence[float]): Starting point in user coordinates.
        reference (Optional[Sequence[int]]): 0-based foliations whose system
            defines the connection (all of them by default).
        step (float): RK4 step.
        steps (int): Number of steps.
    """
    frame = web.slopes_at(x0, 1).frame
    results = []
    for pos, foliation in enumerate(web.foliations):
        points = trace_leaf(foliation, x0, frame, step, steps)
        worst = 0.0
        for user in points:
            framed = web.slopes_at(user, 1, frame=frame)
            connection = solve_framed(web, framed, reference)
            rows, rhs = assemble_geodesic_rows(framed.slopes[pos])
            free = connection.thomas.free_values()[:, 0]
            lhs = rows[..., 0] @ free
            worst = max(worst, float(np.max(np.abs(lhs - rhs[:, 0]))))
        results.append(LeafResidual(pos + 1, worst, points))
    return results
