"""
Centralized logging configuration module.
Provides consistent logging setup across the toolkit, plus a stage timer
used by the experiment runner to record per-stage durations.
"""

import logging
import sys
import time
from contextlib import contextmanager
from typing import Iterator

from survforest.core.config import settings


def setup_logger(name: str) -> logging.Logger:
    """
    Configure and return a logger with consistent formatting.

    Args:
        name: The name of the logger (typically __name__ from calling module)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(settings.LOG_LEVEL.upper())

    # Add handler only if not already present to avoid duplicates
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(
            logging.Formatter("      %(levelname)-5s  %(name)s  %(message)s")
        )
        logger.addHandler(handler)
        logger.propagate = False

    return logger


def get_logger(name: str) -> logging.Logger:
    """
    Get or create a logger with the standard configuration.

    Args:
        name: The name of the logger (typically __name__ from calling module)

    Returns:
        Configured logger instance
    """
    return setup_logger(name)


class StageTimer:
    """Elapsed wall time of a logged stage, filled in when the stage exits."""

    def __init__(self, name: str):
        self.name = name
        self.seconds: float = 0.0


@contextmanager
def log_stage(logger: logging.Logger, name: str) -> Iterator[StageTimer]:
    """
    Log the start and end of a named stage and measure its duration.

    Args:
        logger: Logger to report through
        name: Stage name used in the messages

    Yields:
        StageTimer whose ``seconds`` is set once the block finishes
    """
    timer = StageTimer(name)
    logger.info(f"Stage '{name}' started")
    start = time.perf_counter()
    try:
        yield timer
    except Exception:
        timer.seconds = time.perf_counter() - start
        logger.error(f"Stage '{name}' failed after {timer.seconds:.2f}s")
        raise
    timer.seconds = time.perf_counter() - start
    logger.info(f"Stage '{name}' finished in {timer.seconds:.2f}s")
