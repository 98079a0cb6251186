"""
Synthetic survival data.

Covariates are iid Uniform(low, high). The subspace model maps each point
to a linear predictor Y, the latent event time is Weibull with
S(t) = exp(-(t / scale) ** shape) and scale = exp(Y), and the censoring
time follows the configured mechanism. Records carry min(T, C) and the
indicator T <= C; the latent times and subspace ids go to a separate oracle
table that models never see.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import ValidationError
from scipy.special import gamma

from survforest.core.config import settings
from survforest.core.errors import ConfigError, DimensionMismatchError
from survforest.core.flatconfig import read_flat, write_flat
from survforest.core.logging import get_logger
from survforest.core.seeding import STREAM_PILOT, make_rng
from survforest.models.dataset import Dataset
from survforest.schemas.simulation import (
    CensoringKind,
    CensoringSpec,
    NodeKind,
    SimConfig,
    SubspaceModel,
    SubspaceNode,
)

logger = get_logger(__name__)

# Rows per independently seeded generation block
BLOCK_SIZE = 10_000


# ==================== Presets ====================

EXAMPLE1_MODEL = SubspaceModel(
    nodes=[
        SubspaceNode(kind=NodeKind.PRODUCT, features=(0, 2), offsets=(7.0, -10.0), left=1, right=2),
        SubspaceNode(kind=NodeKind.LEAF, coef=[0.2, -0.1, 0.5]),
        SubspaceNode(kind=NodeKind.LEAF, coef=[0.3, 0.1, -0.3]),
    ]
)

# Four subspaces on x1..x3; x4 and x5 only enter the linear predictor.
EXAMPLE2_MODEL = SubspaceModel(
    nodes=[
        SubspaceNode(kind=NodeKind.THRESHOLD, feature=0, cut=0.0, left=1, right=2),
        SubspaceNode(kind=NodeKind.THRESHOLD, feature=1, cut=0.0, left=3, right=4),
        SubspaceNode(kind=NodeKind.THRESHOLD, feature=2, cut=0.0, left=5, right=6),
        SubspaceNode(kind=NodeKind.LEAF, coef=[0.2, -0.1, 0.3, 0.1, -0.2]),
        SubspaceNode(kind=NodeKind.LEAF, coef=[-0.3, 0.2, 0.1, -0.2, 0.1]),
        SubspaceNode(kind=NodeKind.LEAF, coef=[0.1, 0.3, -0.2, 0.2, 0.1]),
        SubspaceNode(kind=NodeKind.LEAF, coef=[-0.2, -0.2, 0.4, -0.1, 0.2]),
    ]
)


def example1_config(n: int = 1000, seed: int = 0) -> SimConfig:
    return SimConfig(n=n, p=3, model=EXAMPLE1_MODEL, censoring=CensoringSpec(kind=CensoringKind.UNIFORM), seed=seed)


def example2_default(n: int = 1000, seed: int = 0) -> SimConfig:
    """Five covariates, four subspaces driven by x1, x2 and x3."""
    return SimConfig(n=n, p=5, model=EXAMPLE2_MODEL, censoring=CensoringSpec(kind=CensoringKind.UNIFORM), seed=seed)


def example1_dependent_config(n: int = 1000, seed: int = 0) -> SimConfig:
    """
    Example 1 covariates with censoring driven by the same linear predictor.

    C ~ Weibull(2, exp(0.7 + Y)) censors roughly one record in five.
    """
    censoring = CensoringSpec(kind=CensoringKind.DEPENDENT, shape=2.0, intercept=0.7, slope=1.0)
    return SimConfig(n=n, p=3, model=EXAMPLE1_MODEL, censoring=censoring, seed=seed)


PRESETS = {
    "example1": example1_config,
    "example2": example2_default,
    "example1_dependent": example1_dependent_config,
}


def preset_config(name: str) -> SimConfig:
    try:
        return PRESETS[name]()
    except KeyError as e:
        raise ConfigError("Unknown simulation preset", detail=f"{name!r}; known: {', '.join(PRESETS)}") from e


# ==================== Generation ====================


def linear_predictor_ex1(x) -> float:
    """
    Y for the two-subspace model: the first branch applies when
    (x1 + 7)(x3 - 10) > 0, the second otherwise.

    Raises:
        DimensionMismatchError: x does not have exactly 3 entries
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != 3:
        raise DimensionMismatchError("Expected a 3-vector", detail=f"got {x.size} values")
    x1, x2, x3 = x
    if (x1 + 7.0) * (x3 - 10.0) > 0:
        return float(0.2 * x1 - 0.1 * x2 + 0.5 * x3)
    return float(0.3 * x1 + 0.1 * x2 - 0.3 * x3)


def weibull_mean(scale: float, shape: float) -> float:
    return float(scale * gamma(1.0 + 1.0 / shape))


def _latent(config: SimConfig, rng: np.random.Generator, size: int):
    X = rng.uniform(config.covariate_low, config.covariate_high, size=(size, config.p))
    y, subspace = config.model.linear_predictor(X)
    T = np.exp(y) * rng.weibull(config.weibull_shape, size)
    return X, y, subspace, T


def calibrate_uniform_censoring(config: SimConfig, target: Optional[float] = None) -> float:
    """
    c_max for C ~ Uniform(0, c_max) giving the target censoring fraction.

    Bisection on log(c_max) over a pilot sample; the censored fraction
    P(C < T) falls monotonically in c_max.
    """
    target = config.censoring.target_fraction if target is None else target
    if not 0.0 < target < 1.0:
        raise ConfigError("Target censoring fraction must lie in (0, 1)", detail=str(target))

    rng = make_rng(config.seed, STREAM_PILOT)
    _, _, _, T = _latent(config, rng, settings.CALIBRATION_PILOT_SIZE)
    U = rng.uniform(0.0, 1.0, T.size)

    def censored(log_c: float) -> float:
        return float(np.mean(np.exp(log_c) * U < T))

    # censored(lo) == 1 and censored(hi) == 0
    lo = float(np.log(T.min())) - 1.0
    hi = float(np.log(T.max() / U.min())) + 1.0
    mid = 0.5 * (lo + hi)
    for _ in range(settings.CALIBRATION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        frac = censored(mid)
        if abs(frac - target) <= settings.CALIBRATION_TOLERANCE or hi - lo < 1e-12:
            break
        if frac > target:
            lo = mid
        else:
            hi = mid

    c_max = float(np.exp(mid))
    logger.info(f"Calibrated uniform censoring: c_max={c_max:.6g} (pilot censoring {censored(mid):.4f}, target {target})")
    return c_max


def _censoring_times(censoring: CensoringSpec, y: np.ndarray, c_max: Optional[float], rng) -> np.ndarray:
    if censoring.kind == CensoringKind.NONE:
        return np.full(y.size, np.inf)
    if censoring.kind == CensoringKind.UNIFORM:
        return rng.uniform(0.0, c_max, y.size)
    return np.exp(censoring.intercept + censoring.slope * y) * rng.weibull(censoring.shape, y.size)


def _block(config: SimConfig, block: int, size: int, c_max: Optional[float]):
    rng = make_rng(config.seed, "simulate", block)
    X, y, subspace, T = _latent(config, rng, size)
    C = _censoring_times(config.censoring, y, c_max, rng)
    return X, y, subspace, T, C


@dataclass(frozen=True, eq=False)
class SimResult:
    """Observed dataset plus the oracle table (id, true_time, censor_time, subspace_id, linear_predictor)."""

    dataset: Dataset
    oracle: pd.DataFrame
    c_max: Optional[float] = None

    @property
    def censoring_fraction(self) -> float:
        return 1.0 - self.dataset.n_events / self.dataset.n


def simulate(config: SimConfig, workers: int = 1) -> SimResult:
    """
    Draw a synthetic dataset.

    Rows are generated in blocks of ``BLOCK_SIZE`` with per-block streams,
    so the output depends only on the config (seed included).
    """
    c_max = None
    if config.censoring.kind == CensoringKind.UNIFORM:
        c_max = config.censoring.c_max or calibrate_uniform_censoring(config)

    sizes = [min(BLOCK_SIZE, config.n - start) for start in range(0, config.n, BLOCK_SIZE)]
    blocks = Parallel(n_jobs=workers)(delayed(_block)(config, b, size, c_max) for b, size in enumerate(sizes))
    X, y, subspace, T, C = (np.concatenate(parts) for parts in zip(*blocks))

    ids = tuple(str(i) for i in range(config.n))
    dataset = Dataset(
        time=np.minimum(T, C),
        event=T <= C,
        covariates=X,
        feature_names=tuple(f"x{k + 1}" for k in range(config.p)),
        ids=ids,
        require_event=False,
    )
    oracle = pd.DataFrame(
        {"id": ids, "true_time": T, "censor_time": C, "subspace_id": subspace, "linear_predictor": y}
    )
    result = SimResult(dataset=dataset, oracle=oracle, c_max=c_max)
    logger.info(
        f"Simulated {config.n} records over {config.model.n_subspaces} subspaces "
        f"(censoring {config.censoring.kind.value}, {result.censoring_fraction:.3f} censored)"
    )
    return result


# ==================== Config files ====================


def sim_config_from_flat(flat: Dict[str, str]) -> SimConfig:
    try:
        return SimConfig.from_flat(flat)
    except (ValidationError, ValueError) as e:
        raise ConfigError("Invalid simulation config", detail=str(e)) from e


def load_sim_config(path: str | Path, overrides: Optional[Dict[str, str]] = None) -> SimConfig:
    """
    Read a ``sim.*`` flat config file.

    Raises:
        ConfigError: missing file or invalid values
    """
    flat = read_flat(path)
    flat.update(overrides or {})
    return sim_config_from_flat(flat)


def save_sim_config(config: SimConfig, path: str | Path) -> Path:
    return write_flat(config.to_flat(), path, header="simulation config")
