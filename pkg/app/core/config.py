"""
This module defines the application configuration using Pydantic's BaseSettings.

The configuration is loaded from environment variables (prefix ``WEBLIN_``)
and an optional ``.env`` file, and supports default values.
"""

from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Application settings configuration.

    Attributes:
        app_name (str): The name of the application.
        debug (bool): Flag to enable or disable debug logging.
        log_file (str): File receiving a copy of every log record.
        pivot_tol (float): Constant terms below this magnitude are non-units.
        complex_scalars (bool): Store jet coefficients as complex128.
        jet_order (int): Default truncation order of slope jets.
        tolerance (float): Curvature tolerance relative to the Thomas scale.
        residual_tol (float): Consistency threshold for overdetermined systems.
        integrability_tol (float): Accepted X_a(Ω_b) - X_b(Ω_a) residual.
        samples (int): Number of sample points per verdict.
        radius (float): Radius of the sampling ball around the base point.
        seed (int): Seed for sample points and generic frames.
        frame_retries (int): Generic frames tried after the identity frame.
        jobs (Optional[int]): Concurrent sample points (None = cpu count).
    """

    model_config = SettingsConfigDict(env_prefix="WEBLIN_", env_file=".env")

    app_name: str = "webLinearization"
    debug: bool = False
    log_file: str = "weblin.log"
    pivot_tol: float = 1e-10
    complex_scalars: bool = False
    jet_order: int = 4
    tolerance: float = 1e-7
    residual_tol: float = 1e-6
    integrability_tol: float = 1e-8
    samples: int = 7
    radius: float = 0.1
    seed: int = 0
    frame_retries: int = 8
    jobs: Optional[int] = None


settings = Settings()
