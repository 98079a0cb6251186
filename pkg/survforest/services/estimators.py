"""
Nonparametric survival estimators.

Kaplan-Meier product-limit survival curves and Nelson-Aalen cumulative
hazards for right-censored data. Tied times follow the
censoring-after-event convention: deaths at t count in d_j while records
censored at t stay in the risk set n_j.
"""

from typing import Sequence, Tuple

import numpy as np

from survforest.core.errors import EstimationError
from survforest.models.dataset import Dataset, SurvivalRecord
from survforest.models.step_function import ChfCurve, StepFunction

RecordsLike = Dataset | Sequence[SurvivalRecord] | np.ndarray | Sequence[float]


def _unpack(records: RecordsLike, event: Sequence[bool] | np.ndarray | None) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(records, Dataset):
        time, ev = records.time, records.event
    elif event is None:
        records = list(records)
        time = np.array([r.time for r in records], dtype=np.float64)
        ev = np.array([r.event for r in records], dtype=bool)
    else:
        time = np.asarray(records, dtype=np.float64).ravel()
        ev = np.asarray(event, dtype=bool).ravel()
    if time.size == 0:
        raise EstimationError("Estimator needs at least one record")
    if ev.shape != time.shape:
        raise EstimationError("time and event lengths differ", detail=f"{time.size} vs {ev.size}")
    return time, ev


def event_table(time: np.ndarray, event: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Distinct event times with their death and at-risk counts.

    Returns:
        (t_j, d_j, n_j) where n_j counts records with time >= t_j
    """
    event_times, deaths = np.unique(time[event], return_counts=True)
    sorted_time = np.sort(time)
    at_risk = time.size - np.searchsorted(sorted_time, event_times, side="left")
    return event_times, deaths.astype(np.float64), at_risk.astype(np.float64)


def kaplan_meier(records: RecordsLike, event: Sequence[bool] | np.ndarray | None = None) -> StepFunction:
    """
    Product-limit survival estimate.

    Accepts a Dataset, a sequence of SurvivalRecord, or parallel
    ``(time, event)`` arrays. The caller decides which indicator plays
    "event", which is how the censoring distribution is estimated.

    Raises:
        EstimationError: empty input
    """
    time, ev = _unpack(records, event)
    t_j, d_j, n_j = event_table(time, ev)
    return StepFunction(t_j, np.cumprod(1.0 - d_j / n_j), baseline=1.0)


def nelson_aalen(records: RecordsLike, event: Sequence[bool] | np.ndarray | None = None) -> ChfCurve:
    """
    Nelson-Aalen cumulative hazard: H(t) = sum over event times t_j <= t of d_j / n_j.

    Raises:
        EstimationError: empty input
    """
    time, ev = _unpack(records, event)
    t_j, d_j, n_j = event_table(time, ev)
    return StepFunction(t_j, np.cumsum(d_j / n_j), baseline=0.0)


def survival_from_chf(chf: ChfCurve) -> StepFunction:
    """S(t) = exp(-H(t))."""
    return chf.map_values(lambda h: np.exp(-h))
