"""
Forest configuration schemas.
Validated contracts for tree, forest and similarity-based forest fitting.
"""

from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from survforest.core.config import settings
from survforest.core.errors import ConfigError


def check_sampling_weights(weights: np.ndarray) -> np.ndarray:
    """
    Validate a bootstrap probability vector.

    Raises:
        ValueError: negative, non-finite, empty, or not summing to 1 within 1e-9
    """
    if weights.ndim != 1 or weights.size == 0:
        raise ValueError("sampling weights must be a nonempty vector")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise ValueError("sampling weights must be finite and nonnegative")
    total = float(weights.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"sampling weights must sum to 1 (got {total:.12f})")
    return weights


class TreeConfig(BaseModel):
    """
    Per-tree growth parameters.

    ``mtry=None`` resolves to ceil(sqrt(p)) at fit time.
    """

    model_config = ConfigDict(frozen=True)

    d0: int = Field(default=settings.DEFAULT_D0, ge=1)
    mtry: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)

    def resolve_mtry(self, n_features: int) -> int:
        """Candidate feature count for a dataset with ``n_features`` columns."""
        mtry = self.mtry if self.mtry is not None else int(np.ceil(np.sqrt(n_features)))
        if mtry > n_features:
            raise ConfigError("mtry exceeds feature count", detail=f"mtry={mtry}, p={n_features}")
        return mtry


class ForestConfig(BaseModel):
    """
    Random survival forest parameters.

    ``sampling_weights`` is the bootstrap probability vector over training
    records; absent means uniform.
    """

    model_config = ConfigDict(frozen=True)

    n_trees: int = Field(default=settings.DEFAULT_N_TREES, ge=1)
    tree: TreeConfig = Field(default_factory=TreeConfig)
    sampling_weights: Optional[List[float]] = None
    seed: int = Field(default=0, ge=0)
    retry_cap: int = Field(default=settings.BOOTSTRAP_RETRY_CAP, ge=1)

    @field_validator("sampling_weights")
    @classmethod
    def _check_weights(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None:
            check_sampling_weights(np.asarray(value, dtype=np.float64))
        return value

    def with_seed(self, seed: int) -> "ForestConfig":
        return self.model_copy(update={"seed": seed})


class CaseSeedMode(str, Enum):
    """How per-test-case forests are seeded."""

    PER_CASE = "per_case"  # derived from (seed, test index)
    SHARED = "shared"  # every case reuses per_case.seed


class SbrsfConfig(BaseModel):
    """
    Similarity-based random survival forest parameters.

    ``threshold`` zeroes weights below ``threshold * column max`` before
    renormalization; ``None`` disables it.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    global_forest: ForestConfig = Field(default_factory=ForestConfig, alias="global")
    per_case: ForestConfig = Field(default_factory=ForestConfig)
    dependent_censoring: bool = False
    threshold: Optional[float] = Field(default=None, ge=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0)
    case_seeds: CaseSeedMode = CaseSeedMode.PER_CASE

    @model_validator(mode="after")
    def _no_fixed_weights(self) -> "SbrsfConfig":
        if self.global_forest.sampling_weights is not None:
            raise ValueError("the global forest always uses uniform bootstrap sampling")
        if self.per_case.sampling_weights is not None:
            raise ValueError("per-case sampling weights come from the similarity matrix")
        return self
