"""
Forest-level models.
Fitted forests, similarity weight matrices and IPCW vectors.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from survforest.models.tree import SurvivalTree
from survforest.schemas.forest import ForestConfig


@dataclass(frozen=True, eq=False)
class Forest:
    """B survival trees grown on bootstrap samples of one training set."""

    trees: Tuple[SurvivalTree, ...]
    config: ForestConfig
    train_size: int
    samples: Tuple[np.ndarray, ...] = ()

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """
    N_train x N_test nonnegative weights.

    Column j is the sampling distribution over training records used for
    test case j; every column sums to 1.
    """

    weights: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64)
        if weights.ndim != 2:
            raise ValueError("weight matrix must be two-dimensional")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.weights.shape

    def column(self, j: int) -> np.ndarray:
        return self.weights[:, j]

    @classmethod
    def uniform(cls, n_train: int, n_test: int) -> "WeightMatrix":
        return cls(np.full((n_train, n_test), 1.0 / n_train))

    def to_frame(self, train_ids=None, test_ids=None) -> pd.DataFrame:
        """Rows = training index, columns = test index."""
        n_train, n_test = self.shape
        index = list(train_ids) if train_ids is not None else [str(i) for i in range(n_train)]
        columns = list(test_ids) if test_ids is not None else [str(j) for j in range(n_test)]
        frame = pd.DataFrame(self.weights, index=index, columns=columns)
        frame.index.name = "train_id"
        return frame


@dataclass(frozen=True, eq=False)
class IpcwVector:
    """Inverse probability-of-censoring weights, one per training record, all >= 1."""

    weights: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64).ravel()
        if not np.all(np.isfinite(weights)) or np.any(weights < 1.0):
            raise ValueError("IPCW entries must be finite and >= 1")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return int(self.weights.size)

    def to_frame(self, train_ids=None) -> pd.DataFrame:
        ids = list(train_ids) if train_ids is not None else [str(i) for i in range(len(self))]
        return pd.DataFrame({"train_id": ids, "ipcw": self.weights})
