"""
Survival forest toolkit - domain models module.
Immutable numeric containers for data, curves, trees and forests.
"""

from survforest.models.dataset import Dataset, SurvivalRecord
from survforest.models.evaluation import AucComparison, AucCurve
from survforest.models.forest import Forest, IpcwVector, WeightMatrix
from survforest.models.prediction import SbrsfPrediction
from survforest.models.step_function import ChfCurve, StepFunction
from survforest.models.tree import SurvivalTree, TreeNode

__all__ = [
    "Dataset",
    "SurvivalRecord",
    "AucComparison",
    "AucCurve",
    "Forest",
    "IpcwVector",
    "WeightMatrix",
    "SbrsfPrediction",
    "ChfCurve",
    "StepFunction",
    "SurvivalTree",
    "TreeNode",
]
