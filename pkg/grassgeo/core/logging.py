"""
Logging configuration for the command line.
"""
import logging
import sys
from typing import Optional

from grassgeo.core.config import settings


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Install a single stderr handler on the package logger.

    Args:
        level: Level name; defaults to ``settings.LOG_LEVEL``

    Returns:
        logging.Logger: The configured ``grassgeo`` logger
    """
    logger = logging.getLogger("grassgeo")
    logger.setLevel((level or settings.LOG_LEVEL).upper())

    if not any(getattr(h, "_grassgeo", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._grassgeo = True  # type: ignore[attr-defined]
        logger.addHandler(handler)

    return logger
