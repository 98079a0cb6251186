"""
Inverse probability-of-censoring weights.

The censoring distribution G(t) = P(C > t) is the Kaplan-Meier estimate
with the event indicator flipped. A training record's weight is
1 / G(X_i-), the left limit at its observed time, so the record's own
censoring jump never enters its weight.
"""

from typing import Dict

import numpy as np

from survforest.core.errors import DataValidationError, DimensionMismatchError, IpcwError
from survforest.core.logging import get_logger
from survforest.models.dataset import Dataset
from survforest.models.forest import IpcwVector, WeightMatrix
from survforest.models.step_function import StepFunction
from survforest.services.estimators import kaplan_meier

logger = get_logger(__name__)


def censoring_km(train: Dataset) -> StepFunction:
    """
    Kaplan-Meier estimate of remaining uncensored past t.

    Censorings play the role of events; records with an event at t stay in
    the risk set for a censoring jump at t.
    """
    return kaplan_meier(train.time, ~train.event)


def ipcw_weights(train: Dataset) -> IpcwVector:
    """
    IPCW_i = 1 / G(X_i-).

    Raises:
        IpcwError: G(X_i-) = 0 for some record (weight undefined)
    """
    g = np.asarray(censoring_km(train).left_limit(train.time), dtype=np.float64)
    zero = np.flatnonzero(g <= 0.0)
    if zero.size:
        index = int(zero[0])
        raise IpcwError(
            f"IPCW inapplicable at the latest times: censoring survival is 0 before t={train.time[index]:g}",
            index=index,
        )
    vector = IpcwVector(1.0 / g)
    summary = ipcw_summary(vector)
    logger.info(
        f"IPCW weights: min={summary['min']:.4f} mean={summary['mean']:.4f} max={summary['max']:.4f}"
    )
    return vector


def ipcw_summary(ipcw: IpcwVector) -> Dict[str, float]:
    """Min, mean and max of an IPCW vector."""
    w = ipcw.weights
    return {"min": float(w.min()), "mean": float(w.mean()), "max": float(w.max())}


def combine_weights(ipcw: IpcwVector | np.ndarray, sw: WeightMatrix) -> WeightMatrix:
    """
    Sampling weights proportional to IPCW_i * SW_ij, renormalized per test case.

    Raises:
        DimensionMismatchError: IPCW length differs from the weight matrix rows
    """
    w = ipcw.weights if isinstance(ipcw, IpcwVector) else np.asarray(ipcw, dtype=np.float64).ravel()
    if w.size != sw.shape[0]:
        raise DimensionMismatchError(
            "IPCW vector length does not match weight matrix rows",
            detail=f"{w.size} != {sw.shape[0]}",
        )
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise DataValidationError("IPCW entries must be positive and finite")
    product = sw.weights * w[:, None]
    return WeightMatrix(product / product.sum(axis=0))
