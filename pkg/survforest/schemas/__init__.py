"""
Survival forest toolkit - Pydantic schemas module.
Contains the validated configuration contracts and the run manifest.
"""

from survforest.schemas.dataset import CsvSchema, FeatureKind, FeatureSpec
from survforest.schemas.experiment import ExperimentSpec, OutputFile, RunManifest, StageRecord
from survforest.schemas.forest import CaseSeedMode, ForestConfig, SbrsfConfig, TreeConfig
from survforest.schemas.simulation import CensoringKind, CensoringSpec, SimConfig, SubspaceModel, SubspaceNode

__all__ = [
    "CsvSchema",
    "FeatureKind",
    "FeatureSpec",
    "ExperimentSpec",
    "OutputFile",
    "RunManifest",
    "StageRecord",
    "CaseSeedMode",
    "ForestConfig",
    "SbrsfConfig",
    "TreeConfig",
    "CensoringKind",
    "CensoringSpec",
    "SimConfig",
    "SubspaceModel",
    "SubspaceNode",
]
