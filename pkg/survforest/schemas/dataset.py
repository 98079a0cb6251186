"""
Dataset schemas.
Column-role mapping used to ingest survival CSV files.
"""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class FeatureKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class FeatureSpec(BaseModel):
    """
    One covariate column.
    Categorical columns expand to one ``name=level`` indicator per level.
    """

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    kind: FeatureKind = FeatureKind.NUMERIC
    categories: Optional[List[str]] = None

    @model_validator(mode="after")
    def _check_categories(self) -> "FeatureSpec":
        if self.categories is not None:
            if self.kind != FeatureKind.CATEGORICAL:
                raise ValueError(f"numeric feature {self.name!r} cannot list categories")
            if len(set(self.categories)) != len(self.categories) or not self.categories:
                raise ValueError(f"categories of {self.name!r} must be nonempty and distinct")
        return self

    def indicator_names(self, levels: List[str]) -> List[str]:
        return [f"{self.name}={level}" for level in levels]


class CsvSchema(BaseModel):
    """
    Column roles of a survival CSV.
    ``id_col`` is optional; rows are numbered from 0 when absent.
    """

    model_config = ConfigDict(frozen=True)

    time_col: str = "time"
    event_col: str = "event"
    id_col: Optional[str] = "id"
    covariates: List[FeatureSpec]

    @model_validator(mode="after")
    def _check_columns(self) -> "CsvSchema":
        names = [self.time_col, self.event_col] + [f.name for f in self.covariates]
        if self.id_col:
            names.append(self.id_col)
        if len(set(names)) != len(names):
            raise ValueError("a column can play only one role")
        return self
