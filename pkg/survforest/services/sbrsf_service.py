"""
Similarity-based random survival forest.

Three steps:
1. fit a global forest with uniform bootstrap sampling;
2. turn terminal-node co-occurrence into one sampling distribution per
   test case (optionally multiplied by IPCW and hard-thresholded);
3. for each test case, grow a forest whose bootstrap uses that case's
   distribution and average the CHFs of the leaves the case reaches.

Per-case forests only ever predict their own test case, so only the
branches that case descends are grown (see ``leaves_for_point``); the
result is the same as growing full trees and routing.
"""

from typing import List

import numpy as np
from joblib import Parallel, delayed

from survforest.core.errors import DimensionMismatchError, FitError
from survforest.core.logging import get_logger
from survforest.core.seeding import STREAM_CASE, derive_seed
from survforest.models.dataset import Dataset
from survforest.models.forest import IpcwVector, WeightMatrix
from survforest.models.prediction import SbrsfPrediction
from survforest.models.step_function import ChfCurve, ensemble_mean
from survforest.schemas.forest import CaseSeedMode, ForestConfig, SbrsfConfig
from survforest.services.forest_service import fit_forest, leaves_for_point, predict_chf, similarity_weights
from survforest.services.ipcw_service import combine_weights, ipcw_summary, ipcw_weights

logger = get_logger(__name__)


def apply_threshold(weights: WeightMatrix, threshold: float | None) -> WeightMatrix:
    """
    Zero weights below ``threshold * column max`` and renormalize each column.

    Raises:
        FitError: a column loses all its mass
    """
    if not threshold:
        return weights
    w = weights.weights
    keep = w >= threshold * w.max(axis=0, keepdims=True)
    kept = np.where(keep, w, 0.0)
    totals = kept.sum(axis=0)
    if np.any(totals <= 0):
        bad = int(np.flatnonzero(totals <= 0)[0])
        raise FitError("Threshold removed every training case", detail=f"test index {bad}")
    zeroed = ~keep & (w > 0)
    logger.debug(f"Threshold {threshold} zeroed {int(zeroed.sum())} positive weights")
    # columns that lost nothing are passed through untouched
    touched = zeroed.any(axis=0)
    return WeightMatrix(np.where(touched, kept / totals, w))


def case_seed(config: SbrsfConfig, test_index: int) -> int:
    """Seed of the per-case forest for test case ``test_index``."""
    if config.case_seeds == CaseSeedMode.SHARED:
        return config.per_case.seed
    return derive_seed(config.seed, test_index, STREAM_CASE)


def _predict_case(
    train: Dataset, covariates: np.ndarray, weights: np.ndarray, per_case: ForestConfig
) -> ChfCurve:
    leaves = leaves_for_point(train, per_case, covariates, sampling_weights=weights)
    return ensemble_mean([leaf.chf for leaf in leaves])


def predict_with_weights(
    train: Dataset,
    test: Dataset,
    weights: WeightMatrix,
    config: SbrsfConfig,
    workers: int = 1,
) -> List[ChfCurve]:
    """
    Step 3 of the algorithm for an already computed sampling weight matrix.

    Raises:
        DimensionMismatchError: weight matrix shape differs from (N_train, N_test)
        FitError: propagated from per-case forest fitting
    """
    if weights.shape != (train.n, test.n):
        raise DimensionMismatchError(
            "Weight matrix shape does not match train/test sizes",
            detail=f"{weights.shape} != {(train.n, test.n)}",
        )
    jobs = (
        delayed(_predict_case)(
            train,
            test.covariates[j],
            weights.column(j),
            config.per_case.with_seed(case_seed(config, j)),
        )
        for j in range(test.n)
    )
    return list(Parallel(n_jobs=workers)(jobs))


def sbrsf_weights(
    train: Dataset, test: Dataset, config: SbrsfConfig, workers: int = 1
) -> tuple[WeightMatrix, IpcwVector | None]:
    """
    Steps 1 and 2: global forest, similarity weights, optional IPCW and threshold.

    Returns:
        (sampling weight matrix, IPCW vector or None)
    """
    global_forest = fit_forest(train, config.global_forest, workers=workers)
    weights = similarity_weights(global_forest, train, test)
    logger.info(f"Similarity weights computed from {global_forest.n_trees} global trees")

    ipcw = None
    if config.dependent_censoring:
        ipcw = ipcw_weights(train)
        weights = combine_weights(ipcw, weights)
        logger.info(f"Applied IPCW to similarity weights: {ipcw_summary(ipcw)}")

    weights = apply_threshold(weights, config.threshold)
    return weights, ipcw


def sbrsf_fit_predict(
    train: Dataset, test: Dataset, config: SbrsfConfig, workers: int = 1
) -> SbrsfPrediction:
    """
    Fit one similarity-weighted forest per test case and predict its CHF.

    Args:
        train: training data with at least one event
        test: cases to predict
        config: global and per-case forest parameters
        workers: joblib worker count (results do not depend on it)

    Raises:
        FitError: per-case bootstrap exhausted its retries, or threshold zeroed a column
        IpcwError: dependent censoring requested but IPCW undefined
    """
    if test.p != train.p:
        raise DimensionMismatchError("Test and training covariate dimensions differ", detail=f"{test.p} != {train.p}")
    weights, ipcw = sbrsf_weights(train, test, config, workers=workers)
    chfs = predict_with_weights(train, test, weights, config, workers=workers)
    logger.info(f"SB-RSF predicted {test.n} test cases")
    return SbrsfPrediction(per_test_chf=tuple(chfs), weight_matrix=weights, test_ids=test.ids, ipcw=ipcw)


def rsf_fit_predict(train: Dataset, test: Dataset, config: ForestConfig, workers: int = 1) -> SbrsfPrediction:
    """
    Plain random survival forest baseline: one uniform-bootstrap forest for all test cases.

    Raises:
        FitError: propagated from ``fit_forest``
    """
    if test.p != train.p:
        raise DimensionMismatchError("Test and training covariate dimensions differ", detail=f"{test.p} != {train.p}")
    forest = fit_forest(train, config, workers=workers)
    chfs = tuple(predict_chf(forest, x) for x in test.covariates)
    logger.info(f"RSF predicted {test.n} test cases")
    return SbrsfPrediction(
        per_test_chf=chfs,
        weight_matrix=WeightMatrix.uniform(train.n, test.n),
        test_ids=test.ids,
    )
