"""
Experiment schemas.
The experiment spec read from a flat config file, and the run manifest
written next to every run's outputs.
"""

from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from survforest.core.config import settings
from survforest.core.flatconfig import flatten, section, unflatten
from survforest.schemas.forest import ForestConfig, SbrsfConfig
from survforest.schemas.simulation import SimConfig


class DataSource(str, Enum):
    SIMULATE = "simulate"
    CSV = "csv"


class DataSpec(BaseModel):
    """
    Where records come from.
    With ``test_path`` set the files are used as given and no split happens.
    """

    model_config = ConfigDict(frozen=True)

    source: DataSource = DataSource.SIMULATE
    path: Optional[Path] = None
    test_path: Optional[Path] = None
    categorical: List[str] = Field(default_factory=list)


class SplitSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    fraction: float = Field(default=settings.DEFAULT_SPLIT_FRACTION, gt=0.0, lt=1.0)


class EvalSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    grid: str = Field(default=settings.DEFAULT_GRID, min_length=1)


class ExperimentSpec(BaseModel):
    """
    One RSF vs SB-RSF comparison.

    ``seed`` is the master seed; the simulation, the split and every forest
    draw their seeds from it when the run is resolved.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    seed: int = Field(default=0, ge=0)
    data: DataSpec = Field(default_factory=DataSpec)
    sim: Optional[SimConfig] = None
    split: SplitSpec = Field(default_factory=SplitSpec)
    rsf: ForestConfig = Field(default_factory=ForestConfig)
    sbrsf: SbrsfConfig = Field(default_factory=SbrsfConfig)
    evaluation: EvalSpec = Field(default_factory=EvalSpec, alias="eval")
    out: Optional[Path] = None

    @model_validator(mode="after")
    def _check_source(self) -> "ExperimentSpec":
        if self.data.source == DataSource.SIMULATE and self.sim is None:
            raise ValueError("data.source=simulate needs sim.* keys (or sim.preset)")
        if self.data.source == DataSource.CSV and self.data.path is None:
            raise ValueError("data.source=csv needs data.path")
        return self

    def to_flat(self) -> Dict[str, str]:
        body = self.model_dump(mode="json", by_alias=True, exclude={"sim"})
        flat = flatten(body)
        if self.sim is not None:
            flat.update(self.sim.to_flat())
        return flat

    @classmethod
    def from_flat(cls, flat: Dict[str, str]) -> "ExperimentSpec":
        body = unflatten({k: v for k, v in flat.items() if not k.startswith("sim.")})
        categorical = body.get("data", {}).get("categorical")
        if isinstance(categorical, str):
            body["data"]["categorical"] = [c.strip() for c in categorical.split(",") if c.strip()]
        if section(flat, "sim"):
            body["sim"] = SimConfig.from_flat(flat)
        return cls.model_validate(body)


# ==================== Run manifest ====================


class StageStatus(str, Enum):
    SUCCEEDED = "succeeded"
    FAILED = "failed"


class StageRecord(BaseModel):
    name: str
    status: StageStatus
    seconds: float
    detail: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[str] = None


class OutputFile(BaseModel):
    path: str  # relative to the output directory
    sha256: str
    bytes: int


class RunManifest(BaseModel):
    """
    Everything needed to rerun an experiment: the resolved flat config,
    the derived seeds, package versions, stage timings and the outputs.
    """

    app: str = settings.APP_NAME
    app_version: str = settings.APP_VERSION
    command: str
    started_at: datetime
    status: StageStatus = StageStatus.SUCCEEDED
    config: Dict[str, str]
    seeds: Dict[str, int] = Field(default_factory=dict)
    versions: Dict[str, str] = Field(default_factory=dict)
    workers: int = 1
    stages: List[StageRecord] = Field(default_factory=list)
    outputs: List[OutputFile] = Field(default_factory=list)
    quarantine: Optional[str] = None

    def stage(self, name: str) -> Optional[StageRecord]:
        return next((s for s in self.stages if s.name == name), None)

    def save(self, path: Path) -> Path:
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        return cls.model_validate_json(path.read_text(encoding="utf-8"))
