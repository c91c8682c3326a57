"""
This module defines the Pydantic schema of analysis settings.

Schemas:
- AnalysisConfig: Per-run numeric knobs, defaulting to the application settings.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings


class AnalysisConfig(BaseModel):
    """
    Settings of one linearizability analysis.

    Attributes:
        order (int): Slope jet order (at least 3).
        tolerance (float): Curvature tolerance relative to the Thomas scale.
        residual_tol (float): Consistency tolerance of overdetermined systems.
        samples (int): Number of sample points.
        radius (float): Radius of the sampling ball.
        seed (int): Seed of the sample points and generic frames.
        base_point (Optional[list[float]]): Base point (web default otherwise).
        output_format (str): ``text`` or ``json``.
        jobs (Optional[int]): Concurrent sample points.
    """

    order: int = Field(settings.jet_order, ge=3, description="Slope jet order")
    tolerance: float = Field(settings.tolerance, gt=0, description="Curvature tolerance")
    residual_tol: float = Field(settings.residual_tol, gt=0, description="Residual tolerance")
    samples: int = Field(settings.samples, ge=1, description="Number of sample points")
    radius: float = Field(settings.radius, gt=0, description="Sampling radius")
    seed: int = Field(settings.seed, description="RNG seed")
    base_point: Optional[list[float]] = None
    output_format: Literal["text", "json"] = "text"
    jobs: Optional[int] = Field(settings.jobs, ge=1, description="Concurrent samples")

    model_config = ConfigDict(validate_assignment=True)

    @model_validator(mode="before")
    @classmethod
    def drop_unset(cls, values):
        """Let unset CLI options fall back to the defaults."""
        if isinstance(values, dict):
            return {key: value for key, value in values.items() if value is not None}
        return values
