"""
Survival tree model.
Arena of nodes produced by log-rank tree growth.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from survforest.models.step_function import ChfCurve


@dataclass(frozen=True, eq=False)
class TreeNode:
    """
    One node of a survival tree.

    Internal nodes carry ``split`` (feature index, threshold) and
    ``children`` (left, right); terminal nodes carry ``members`` (training
    sample indices, bootstrap duplicates included) and their ``chf``.
    ``path`` is the 0/1 branch sequence from the root.
    """

    split: Optional[Tuple[int, float]]
    children: Optional[Tuple[int, int]]
    members: Optional[np.ndarray]
    chf: Optional[ChfCurve]
    n_members: int
    n_unique_deaths: int
    path: Tuple[int, ...] = ()

    @property
    def is_terminal(self) -> bool:
        return self.split is None


@dataclass(frozen=True, eq=False)
class SurvivalTree:
    """
    Binary survival tree; go left iff ``x[feature] <= threshold``.

    The flat ``feature``/``threshold``/``left``/``right`` arrays mirror the
    node arena for vectorized routing (-1 marks a terminal node).
    """

    nodes: Tuple[TreeNode, ...]
    n_features: int
    root: int = 0
    feature: np.ndarray = field(init=False, repr=False)
    threshold: np.ndarray = field(init=False, repr=False)
    left: np.ndarray = field(init=False, repr=False)
    right: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        size = len(self.nodes)
        feature = np.full(size, -1, dtype=np.intp)
        threshold = np.zeros(size, dtype=np.float64)
        left = np.full(size, -1, dtype=np.intp)
        right = np.full(size, -1, dtype=np.intp)
        for idx, node in enumerate(self.nodes):
            if not node.is_terminal:
                feature[idx], threshold[idx] = node.split
                left[idx], right[idx] = node.children
        object.__setattr__(self, "feature", feature)
        object.__setattr__(self, "threshold", threshold)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def terminal_indices(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)

    @property
    def n_leaves(self) -> int:
        return int(self.terminal_indices.size)

    @property
    def depth(self) -> int:
        return max(len(node.path) for node in self.nodes)
