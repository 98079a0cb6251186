"""
Tests for inverse probability-of-censoring weights.
"""

import numpy as np
import pytest

from survforest.core.errors import DimensionMismatchError
from survforest.models.dataset import Dataset
from survforest.models.forest import IpcwVector, WeightMatrix
from survforest.services.estimators import kaplan_meier
from survforest.services.ipcw_service import censoring_km, combine_weights, ipcw_summary, ipcw_weights


def _data(time, event, require_event=True) -> Dataset:
    time = np.asarray(time, dtype=float)
    return Dataset(
        time=time,
        event=np.asarray(event, dtype=bool),
        covariates=np.zeros((time.size, 1)),
        feature_names=("x1",),
        require_event=require_event,
    )


def test_no_censoring_gives_unit_weights(three_events):
    g = censoring_km(three_events)
    assert np.all(g(np.array([0.0, 1.0, 2.0, 3.0, 9.0])) == 1.0)
    assert np.array_equal(ipcw_weights(three_events).weights, np.ones(3))


def test_censoring_curve_when_everything_is_censored():
    g = censoring_km(_data([1.0, 2.0, 3.0], [False, False, False], require_event=False))
    assert np.allclose(g([1.0, 2.0, 3.0]), [2 / 3, 1 / 3, 0.0], atol=1e-12)


def test_ipcw_uses_left_limit():
    """{(1, censored), (2, event)}: G(1-)=1, G(2-)=1/2."""
    ipcw = ipcw_weights(_data([1.0, 2.0], [False, True]))
    assert np.allclose(ipcw.weights, [1.0, 2.0], atol=1e-12)


def test_ipcw_order_invariant(dataset_factory):
    data = dataset_factory(40, seed=3, censor_rate=0.4)
    perm = np.random.default_rng(0).permutation(data.n)
    a = ipcw_weights(data).weights
    b = ipcw_weights(data.subset(perm)).weights
    assert np.allclose(a[perm], b, atol=1e-12)


def test_censoring_km_is_km_of_flipped_indicator(dataset_factory):
    data = dataset_factory(50, seed=8, censor_rate=0.3)
    assert censoring_km(data).equals(kaplan_meier(data.time, ~data.event))
    flipped_twice = kaplan_meier(data.time, ~~data.event)
    assert flipped_twice.equals(kaplan_meier(data))


def test_ipcw_weights_at_least_one_and_increasing_in_time(dataset_factory):
    data = dataset_factory(80, seed=2, censor_rate=0.35)
    w = ipcw_weights(data).weights
    assert np.all(w >= 1.0)
    order = np.argsort(data.time, kind="stable")
    assert np.all(np.diff(w[order]) >= -1e-12)
    summary = ipcw_summary(ipcw_weights(data))
    assert summary["min"] >= 1.0 and summary["max"] >= summary["mean"] >= summary["min"]


def test_combine_with_unit_ipcw_is_identity():
    sw = WeightMatrix(np.array([[0.2, 0.5], [0.3, 0.5], [0.5, 0.0]]))
    combined = combine_weights(np.ones(3), sw)
    assert np.allclose(combined.weights, sw.weights, atol=1e-15)


def test_combine_weights_example():
    """IPCW (2, 1) times SW (1/2, 1/2) renormalizes to (2/3, 1/3)."""
    sw = WeightMatrix(np.array([[0.5], [0.5]]))
    combined = combine_weights(IpcwVector(np.array([2.0, 1.0])), sw)
    assert np.allclose(combined.column(0), [2 / 3, 1 / 3], atol=1e-12)


def test_combine_weights_scale_invariant():
    rng = np.random.default_rng(5)
    raw = rng.random((6, 4))
    sw = WeightMatrix(raw / raw.sum(axis=0))
    ipcw = 1.0 + rng.random(6) * 3
    a = combine_weights(ipcw, sw).weights
    b = combine_weights(ipcw * 7.5, sw).weights
    assert np.allclose(a, b, atol=1e-12)
    assert np.allclose(a.sum(axis=0), 1.0, atol=1e-12)


def test_combine_weights_length_mismatch():
    sw = WeightMatrix(np.full((3, 2), 1 / 3))
    with pytest.raises(DimensionMismatchError):
        combine_weights(np.ones(4), sw)


def test_ipcw_vector_rejects_weights_below_one():
    with pytest.raises(ValueError):
        IpcwVector(np.array([0.5, 1.0]))
