"""
Survival tree growth.

Recursive log-rank splitting under the d0 constraint: every terminal node
keeps at least d0 unique death times. Split candidates are the midpoints
between consecutive distinct in-node values of mtry randomly drawn
features; ties in score go to the lowest feature index, then the smallest
threshold.

Each node draws its candidate features from a random stream keyed by
(tree seed, path from root). A node's split therefore does not depend on
the order in which the tree is grown, which lets ``grow_leaf_for`` grow
only the branch a given point descends and still land in exactly the leaf
the full tree would route it to.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from survforest.core.errors import DimensionMismatchError, EstimationError, FitError
from survforest.core.logging import get_logger
from survforest.core.seeding import make_rng
from survforest.models.dataset import Dataset, SurvivalRecord
from survforest.models.tree import SurvivalTree, TreeNode
from survforest.schemas.forest import TreeConfig
from survforest.services.estimators import nelson_aalen

logger = get_logger(__name__)

GroupLike = Dataset | Sequence[SurvivalRecord] | Tuple[np.ndarray, np.ndarray]


# ============================================================================
# LOG-RANK STATISTIC
# ============================================================================


def _group_arrays(group: GroupLike) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(group, Dataset):
        return group.time, group.event
    if isinstance(group, tuple) and len(group) == 2 and not isinstance(group[0], SurvivalRecord):
        return np.asarray(group[0], dtype=np.float64), np.asarray(group[1], dtype=bool)
    records = list(group)
    return (
        np.array([r.time for r in records], dtype=np.float64),
        np.array([r.event for r in records], dtype=bool),
    )


def _standardized_logrank(
    n_left: np.ndarray, d_left: np.ndarray, n_all: np.ndarray, d_all: np.ndarray
) -> np.ndarray:
    """
    |sum_j (d1j - n1j dj / nj)| / sqrt(sum_j var_j) with hypergeometric variance.

    Leading axes of ``n_left``/``d_left`` index candidate splits; the last
    axis indexes event times. Zero total variance scores 0.
    """
    frac = n_left / n_all
    observed_minus_expected = (d_left - frac * d_all).sum(axis=-1)
    denom = np.where(n_all > 1, n_all - 1, 1.0)
    variance = (frac * (1.0 - frac) * d_all * (n_all - d_all) / denom).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.abs(observed_minus_expected) / np.sqrt(variance)
    return np.where(variance > 0, score, 0.0)


def logrank_score(left: GroupLike, right: GroupLike) -> float:
    """
    Absolute standardized two-sample log-rank statistic.

    Args:
        left: records of the first group (Dataset, SurvivalRecord list, or (time, event))
        right: records of the second group

    Returns:
        Nonnegative score; 0 when the variance sum is 0

    Raises:
        EstimationError: either group is empty
    """
    left_time, left_event = _group_arrays(left)
    right_time, right_event = _group_arrays(right)
    if left_time.size == 0 or right_time.size == 0:
        raise EstimationError("Log-rank score needs two nonempty groups")

    time = np.concatenate([left_time, right_time])
    event = np.concatenate([left_event, right_event])
    event_times = np.unique(time[event])
    if event_times.size == 0:
        return 0.0

    n_all = (time[:, None] >= event_times).sum(axis=0).astype(np.float64)
    d_all = (event[:, None] & (time[:, None] == event_times)).sum(axis=0).astype(np.float64)
    n_left = (left_time[:, None] >= event_times).sum(axis=0).astype(np.float64)
    d_left = (left_event[:, None] & (left_time[:, None] == event_times)).sum(axis=0).astype(np.float64)
    return float(_standardized_logrank(n_left, d_left, n_all, d_all))


# ============================================================================
# SPLIT SEARCH
# ============================================================================


@dataclass(frozen=True)
class SplitCandidate:
    score: float
    feature: int
    threshold: float
    left_mask: np.ndarray


def _best_split(
    time: np.ndarray,
    event: np.ndarray,
    covariates: np.ndarray,
    features: np.ndarray,
    d0: int,
) -> Optional[SplitCandidate]:
    """
    Highest-scoring admissible split over the candidate features.

    Admissible: both children keep at least one record and at least d0
    unique death times.
    """
    event_times = np.unique(time[event])
    if event_times.size < 2 * d0:
        return None

    n = time.size
    death_col = np.searchsorted(event_times, time)
    n_all = (time[:, None] >= event_times).sum(axis=0).astype(np.float64)
    d_all = np.bincount(death_col[event], minlength=event_times.size).astype(np.float64)

    best: Optional[SplitCandidate] = None
    for feature in np.sort(features):
        x = covariates[:, feature]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        # left child = first k sorted records
        cuts = np.flatnonzero(xs[1:] > xs[:-1]) + 1
        if cuts.size == 0:
            continue

        ts = time[order]
        es = event[order]
        at_risk = ts[:, None] >= event_times
        deaths = np.zeros((n, event_times.size), dtype=np.float64)
        dead_rows = np.flatnonzero(es)
        deaths[dead_rows, death_col[order][dead_rows]] = 1.0

        n_left = np.cumsum(at_risk, axis=0, dtype=np.float64)[cuts - 1]
        d_left = np.cumsum(deaths, axis=0)[cuts - 1]

        unique_left = (d_left > 0).sum(axis=1)
        unique_right = ((d_all - d_left) > 0).sum(axis=1)
        admissible = (unique_left >= d0) & (unique_right >= d0)
        if not admissible.any():
            continue

        scores = np.where(admissible, _standardized_logrank(n_left, d_left, n_all, d_all), -np.inf)
        pick = int(np.argmax(scores))
        if best is not None and not scores[pick] > best.score:
            continue

        k = int(cuts[pick])
        low, high = xs[k - 1], xs[k]
        threshold = 0.5 * (low + high)
        if not (low <= threshold < high):
            threshold = low
        best = SplitCandidate(float(scores[pick]), int(feature), float(threshold), x <= threshold)

    return best


# ============================================================================
# GROWTH
# ============================================================================


def _make_terminal(data: Dataset, members: np.ndarray, path: Tuple[int, ...]) -> TreeNode:
    time = data.time[members]
    event = data.event[members]
    return TreeNode(
        split=None,
        children=None,
        members=members,
        chf=nelson_aalen(time, event),
        n_members=int(members.size),
        n_unique_deaths=int(np.unique(time[event]).size),
        path=path,
    )


def _split_node(
    data: Dataset, members: np.ndarray, path: Tuple[int, ...], mtry: int, config: TreeConfig
) -> Optional[SplitCandidate]:
    rng = make_rng(config.seed, *path)
    features = rng.choice(data.p, size=mtry, replace=False)
    return _best_split(
        data.time[members],
        data.event[members],
        data.covariates[members],
        features,
        config.d0,
    )


def _check_sample(data: Dataset, sample: np.ndarray, config: TreeConfig) -> np.ndarray:
    sample = np.asarray(sample, dtype=np.intp).ravel()
    if sample.size == 0:
        raise FitError("Tree sample is empty")
    if sample.min() < 0 or sample.max() >= data.n:
        raise FitError("Tree sample index out of range", detail=f"n={data.n}")
    unique_deaths = np.unique(data.time[sample][data.event[sample]]).size
    if unique_deaths < config.d0:
        raise FitError(
            "Tree sample has fewer unique death times than d0",
            detail=f"{unique_deaths} < d0={config.d0}",
        )
    return sample


def grow_tree(data: Dataset, sample_indices: Sequence[int] | np.ndarray, config: TreeConfig) -> SurvivalTree:
    """
    Grow a full survival tree on a (bootstrap) sample of training rows.

    Args:
        data: training dataset
        sample_indices: multiset of row indices into ``data``
        config: d0, mtry and seed

    Returns:
        SurvivalTree whose terminal members partition ``sample_indices``

    Raises:
        FitError: the sample has fewer than d0 unique death times
    """
    sample = _check_sample(data, sample_indices, config)
    mtry = config.resolve_mtry(data.p)

    nodes: List[Optional[TreeNode]] = [None]
    stack: List[Tuple[int, np.ndarray, Tuple[int, ...]]] = [(0, sample, ())]
    while stack:
        idx, members, path = stack.pop()
        split = _split_node(data, members, path, mtry, config)
        if split is None:
            nodes[idx] = _make_terminal(data, members, path)
            continue

        left_idx, right_idx = len(nodes), len(nodes) + 1
        nodes.extend([None, None])
        nodes[idx] = TreeNode(
            split=(split.feature, split.threshold),
            children=(left_idx, right_idx),
            members=None,
            chf=None,
            n_members=int(members.size),
            n_unique_deaths=int(np.unique(data.time[members][data.event[members]]).size),
            path=path,
        )
        stack.append((right_idx, members[~split.left_mask], path + (1,)))
        stack.append((left_idx, members[split.left_mask], path + (0,)))

    tree = SurvivalTree(nodes=tuple(nodes), n_features=data.p)
    logger.debug(f"Grew tree seed={config.seed}: {len(nodes)} nodes, {tree.n_leaves} leaves")
    return tree


def grow_leaf_for(
    data: Dataset,
    sample_indices: Sequence[int] | np.ndarray,
    config: TreeConfig,
    covariates: Sequence[float] | np.ndarray,
) -> TreeNode:
    """
    Grow only the branch ``covariates`` descends and return its terminal node.

    The result equals the leaf that ``route`` finds in
    ``grow_tree(data, sample_indices, config)``, members and CHF included.

    Raises:
        FitError: the sample has fewer than d0 unique death times
        DimensionMismatchError: covariate length differs from the training data
    """
    x = _check_point(covariates, data.p)
    sample = _check_sample(data, sample_indices, config)
    mtry = config.resolve_mtry(data.p)

    members, path = sample, ()
    while True:
        split = _split_node(data, members, path, mtry, config)
        if split is None:
            return _make_terminal(data, members, path)
        if x[split.feature] <= split.threshold:
            members, path = members[split.left_mask], path + (0,)
        else:
            members, path = members[~split.left_mask], path + (1,)


# ============================================================================
# ROUTING
# ============================================================================


def _check_point(covariates: Sequence[float] | np.ndarray, n_features: int) -> np.ndarray:
    x = np.asarray(covariates, dtype=np.float64).ravel()
    if x.size != n_features:
        raise DimensionMismatchError(
            "Covariate vector length does not match training dimension",
            detail=f"{x.size} != {n_features}",
        )
    return x


def route(tree: SurvivalTree, covariates: Sequence[float] | np.ndarray) -> int:
    """
    Index of the terminal node a point reaches (``<= threshold`` goes left).

    Raises:
        DimensionMismatchError: covariate length differs from the training data
    """
    x = _check_point(covariates, tree.n_features)
    idx = tree.root
    while tree.feature[idx] >= 0:
        idx = tree.left[idx] if x[tree.feature[idx]] <= tree.threshold[idx] else tree.right[idx]
    return int(idx)


def route_many(tree: SurvivalTree, covariates: np.ndarray) -> np.ndarray:
    """Vectorized ``route`` over the rows of a covariate matrix."""
    X = np.asarray(covariates, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != tree.n_features:
        raise DimensionMismatchError(
            "Covariate matrix width does not match training dimension",
            detail=f"shape={X.shape}, p={tree.n_features}",
        )
    idx = np.full(X.shape[0], tree.root, dtype=np.intp)
    rows = np.arange(X.shape[0])
    active = tree.feature[idx] >= 0
    while active.any():
        r = rows[active]
        node = idx[r]
        go_left = X[r, tree.feature[node]] <= tree.threshold[node]
        idx[r] = np.where(go_left, tree.left[node], tree.right[node])
        active = tree.feature[idx] >= 0
    return idx


# ============================================================================
# DEBUG DUMP
# ============================================================================


def dump_tree(tree: SurvivalTree, feature_names: Sequence[str] | None = None) -> str:
    """Indented text dump: node id, split, member count, unique death count."""
    lines: List[str] = []
    stack = [(tree.root, 0)]
    while stack:
        idx, depth = stack.pop()
        node = tree.nodes[idx]
        pad = "  " * depth
        if node.is_terminal:
            lines.append(f"{pad}[{idx}] leaf n={node.n_members} deaths={node.n_unique_deaths}")
            continue
        feature, threshold = node.split
        name = feature_names[feature] if feature_names else f"x[{feature}]"
        lines.append(f"{pad}[{idx}] {name} <= {threshold:.6g} n={node.n_members} deaths={node.n_unique_deaths}")
        left, right = node.children
        stack.append((right, depth + 1))
        stack.append((left, depth + 1))
    return "\n".join(lines)
