"""
Shared fixtures for the survival forest test suite.
"""

from pathlib import Path

import numpy as np
import pytest

from survforest.models.dataset import Dataset
from survforest.schemas.forest import ForestConfig, TreeConfig

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def synthetic_dataset(n: int, p: int = 3, seed: int = 0, censor_rate: float = 0.25) -> Dataset:
    """Exponential times depending on x1 and x2, random censoring."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, p))
    rate = np.exp(1.2 * X[:, 0] - 0.8 * (X[:, 1 % p] > 0))
    T = rng.exponential(1.0 / rate)
    C = rng.exponential(1.0 / (rate.mean() * censor_rate / (1 - censor_rate)), size=n)
    return Dataset(
        time=np.minimum(T, C),
        event=T <= C,
        covariates=X,
        feature_names=tuple(f"x{k + 1}" for k in range(p)),
    )


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture
def three_events() -> Dataset:
    """Times 1, 2, 3, all events, one covariate."""
    return Dataset(
        time=np.array([1.0, 2.0, 3.0]),
        event=np.array([True, True, True]),
        covariates=np.array([[0.0], [1.0], [2.0]]),
        feature_names=("x1",),
    )


@pytest.fixture
def small_data() -> Dataset:
    return synthetic_dataset(60, seed=11)


@pytest.fixture
def train_test():
    data = synthetic_dataset(80, seed=5)
    return data.subset(np.arange(56)), data.subset(np.arange(56, 80), require_event=False)


@pytest.fixture
def small_forest() -> ForestConfig:
    return ForestConfig(n_trees=5, tree=TreeConfig(d0=2), seed=3)


@pytest.fixture
def dataset_factory():
    return synthetic_dataset
