"""
Exception hierarchy for the survival forest toolkit.

Services raise these; the CLI turns them into a logged message and a
nonzero exit status.
"""

from typing import Any


class SurvForestError(Exception):
    """Base class for every error the toolkit raises on purpose."""

    def __init__(self, message: str, detail: Any = None):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def __str__(self) -> str:
        if self.detail is None:
            return self.message
        return f"{self.message} ({self.detail})"


class DataValidationError(SurvForestError):
    """Input data violates a dataset invariant."""


class ConfigError(SurvForestError):
    """A configuration file, spec or grid string is invalid."""


class DimensionMismatchError(SurvForestError):
    """Covariate vector or matrix shape does not match the fitted model."""


class EstimationError(SurvForestError):
    """A nonparametric estimator was called on unusable input."""


class FitError(SurvForestError):
    """A tree or forest could not be fitted."""


class IpcwError(SurvForestError):
    """Inverse probability-of-censoring weight is undefined for a record."""

    def __init__(self, message: str, index: int):
        super().__init__(message, detail=f"record index {index}")
        self.index = index
