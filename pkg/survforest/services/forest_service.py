"""
Random survival forest.

Weighted bootstrap over training records, ensemble CHF prediction, and
similarity weights from terminal-node co-occurrence.

Every tree's bootstrap stream and growth seed are derived from
(forest seed, tree index), so the forest is identical whatever the worker
count.
"""

from typing import List, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from survforest.core.errors import DimensionMismatchError, FitError
from survforest.core.logging import get_logger
from survforest.core.seeding import STREAM_BOOTSTRAP, STREAM_TREE, derive_seed, make_rng
from survforest.models.dataset import Dataset
from survforest.models.forest import Forest, WeightMatrix
from survforest.models.step_function import ChfCurve, ensemble_mean
from survforest.models.tree import SurvivalTree, TreeNode
from survforest.schemas.forest import ForestConfig, TreeConfig, check_sampling_weights
from survforest.services.tree_service import grow_leaf_for, grow_tree, route, route_many

logger = get_logger(__name__)


# ============================================================================
# BOOTSTRAP
# ============================================================================


def resolve_sampling_weights(n: int, config: ForestConfig, sampling_weights=None) -> np.ndarray:
    """
    Bootstrap probabilities: explicit argument, else config, else uniform 1/n.

    Raises:
        FitError: weights invalid or of the wrong length
    """
    if sampling_weights is None and config.sampling_weights is not None:
        sampling_weights = config.sampling_weights
    if sampling_weights is None:
        return np.full(n, 1.0 / n)
    weights = np.asarray(sampling_weights, dtype=np.float64)
    if weights.shape != (n,):
        raise FitError("Sampling weight vector length does not match training size", detail=f"{weights.size} != {n}")
    try:
        return check_sampling_weights(weights)
    except ValueError as e:
        raise FitError("Invalid sampling weights", detail=str(e)) from e


def weighted_bootstrap(n: int, weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw n indices with replacement with probabilities ``weights``."""
    return rng.choice(n, size=n, replace=True, p=weights)


def draw_bootstrap(
    data: Dataset,
    weights: np.ndarray,
    d0: int,
    rng: np.random.Generator,
    retry_cap: int,
) -> np.ndarray:
    """
    Bootstrap sample holding at least d0 unique death times.

    Samples short of d0 unique deaths are redrawn from the same stream.

    Raises:
        FitError: no acceptable sample within ``retry_cap`` draws
    """
    for attempt in range(retry_cap):
        sample = weighted_bootstrap(data.n, weights, rng)
        unique_deaths = np.unique(data.time[sample][data.event[sample]]).size
        if unique_deaths >= d0:
            if attempt:
                logger.debug(f"Bootstrap accepted after {attempt} redraws")
            return sample
    logger.error(f"Bootstrap retry cap {retry_cap} exhausted (d0={d0})")
    raise FitError(
        "Could not draw a bootstrap sample with enough unique deaths",
        detail=f"d0={d0}, retry cap {retry_cap} exhausted; data too censored or weights too concentrated",
    )


def tree_streams(config: ForestConfig, index: int) -> Tuple[np.random.Generator, TreeConfig]:
    """Bootstrap generator and seeded tree config for tree ``index``."""
    rng = make_rng(config.seed, index, STREAM_BOOTSTRAP)
    tree_config = config.tree.model_copy(update={"seed": derive_seed(config.seed, index, STREAM_TREE)})
    return rng, tree_config


# ============================================================================
# FITTING
# ============================================================================


def _fit_one(data: Dataset, config: ForestConfig, weights: np.ndarray, index: int) -> Tuple[SurvivalTree, np.ndarray]:
    rng, tree_config = tree_streams(config, index)
    sample = draw_bootstrap(data, weights, tree_config.d0, rng, config.retry_cap)
    return grow_tree(data, sample, tree_config), sample


def _leaf_one(
    data: Dataset, config: ForestConfig, weights: np.ndarray, index: int, covariates: np.ndarray
) -> TreeNode:
    rng, tree_config = tree_streams(config, index)
    sample = draw_bootstrap(data, weights, tree_config.d0, rng, config.retry_cap)
    return grow_leaf_for(data, sample, tree_config, covariates)


def fit_forest(
    data: Dataset,
    config: ForestConfig,
    sampling_weights: Sequence[float] | np.ndarray | None = None,
    workers: int = 1,
) -> Forest:
    """
    Fit a random survival forest.

    Each tree is grown on a size-N sample drawn with replacement using the
    sampling weights (uniform when absent).

    Args:
        data: training dataset
        config: forest parameters
        sampling_weights: overrides ``config.sampling_weights`` when given
        workers: joblib worker count

    Raises:
        FitError: invalid weights or bootstrap retry cap exhausted
    """
    weights = resolve_sampling_weights(data.n, config, sampling_weights)
    config.tree.resolve_mtry(data.p)
    results = Parallel(n_jobs=workers)(
        delayed(_fit_one)(data, config, weights, i) for i in range(config.n_trees)
    )
    trees = tuple(tree for tree, _ in results)
    samples = tuple(sample for _, sample in results)
    logger.debug(f"Fitted forest of {len(trees)} trees on {data.n} records (seed={config.seed})")
    return Forest(trees=trees, config=config, train_size=data.n, samples=samples)


def leaves_for_point(
    data: Dataset,
    config: ForestConfig,
    covariates: Sequence[float] | np.ndarray,
    sampling_weights: Sequence[float] | np.ndarray | None = None,
) -> List[TreeNode]:
    """
    The terminal node ``covariates`` reaches in each tree of the forest
    ``fit_forest(data, config, sampling_weights)`` would grow, growing only
    the branches the point descends.
    """
    weights = resolve_sampling_weights(data.n, config, sampling_weights)
    x = np.asarray(covariates, dtype=np.float64).ravel()
    return [_leaf_one(data, config, weights, i, x) for i in range(config.n_trees)]


# ============================================================================
# PREDICTION
# ============================================================================


def _check_point(forest: Forest, covariates) -> np.ndarray:
    x = np.asarray(covariates, dtype=np.float64).ravel()
    if x.size != forest.n_features:
        raise DimensionMismatchError(
            "Covariate vector length does not match training dimension",
            detail=f"{x.size} != {forest.n_features}",
        )
    return x


def predict_chf(forest: Forest, covariates: Sequence[float] | np.ndarray) -> ChfCurve:
    """
    Ensemble CHF: pointwise mean of the routed leaf CHFs over all trees.

    Raises:
        DimensionMismatchError: covariate length differs from the training data
    """
    x = _check_point(forest, covariates)
    leaves = [tree.nodes[route(tree, x)].chf for tree in forest.trees]
    return ensemble_mean(leaves)


def leaf_membership(forest: Forest, covariates: np.ndarray) -> np.ndarray:
    """(B, n_points) terminal node index of every point in every tree."""
    X = np.asarray(covariates, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != forest.n_features:
        raise DimensionMismatchError(
            "Covariate matrix width does not match training dimension",
            detail=f"shape={X.shape}, p={forest.n_features}",
        )
    return np.vstack([route_many(tree, X) for tree in forest.trees])


def similarity_weights(forest: Forest, train: Dataset, test: Dataset) -> WeightMatrix:
    """
    Terminal-node co-occurrence weights.

    c[i, j] counts the trees in which test case j lands in a leaf containing
    training case i (a case counts once per tree whatever its bootstrap
    multiplicity); each column is then normalized to sum to 1.

    Raises:
        DimensionMismatchError: test covariate width differs from the training data
    """
    if train.n != forest.train_size:
        raise DimensionMismatchError(
            "Training set size does not match the fitted forest",
            detail=f"{train.n} != {forest.train_size}",
        )
    leaf_ids = leaf_membership(forest, test.covariates)
    counts = np.zeros((train.n, test.n), dtype=np.float64)
    for tree, leaves in zip(forest.trees, leaf_ids):
        for leaf in np.unique(leaves):
            members = np.unique(tree.nodes[leaf].members)
            cols = np.flatnonzero(leaves == leaf)
            counts[np.ix_(members, cols)] += 1.0

    totals = counts.sum(axis=0)
    # leaves are never empty, so every test case shares a leaf with someone
    assert np.all(totals > 0), "test case shares no terminal node with any training case"
    return WeightMatrix(counts / totals)
