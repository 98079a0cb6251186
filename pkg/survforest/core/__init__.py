"""
Core module for the survival forest toolkit.
Contains configuration, logging, errors, seeding and config-file utilities.
"""

from survforest.core.config import settings
from survforest.core.errors import SurvForestError
from survforest.core.logging import get_logger

__all__ = [
    "settings",
    "SurvForestError",
    "get_logger",
]
