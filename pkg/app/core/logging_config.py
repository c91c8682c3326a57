"""This module defines the logging configuration for the application."""

import logging

from app.core.config import settings

logging.basicConfig(
    format="%(asctime)s - %(levelname)s - %(message)s",
    level=logging.DEBUG if settings.debug else logging.INFO,
    handlers=[
        logging.StreamHandler(),
        logging.FileHandler(settings.log_file, delay=True),
    ],
)

logger = logging.getLogger("web_linearization")


def set_verbose(verbose: bool) -> None:
    """Switch the application logger between INFO and DEBUG."""
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
