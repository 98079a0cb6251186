"""
Time-varying AUC.

Cumulative/dynamic definition: at time t the cases are records with an
event at or before t and the controls are records still under observation
after t; records censored at or before t are left out. A record's risk
score at t is its cumulative hazard H_i(t). Tied scores count one half.
"""

from typing import Sequence

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from survforest.core.errors import ConfigError, DimensionMismatchError
from survforest.core.logging import get_logger
from survforest.models.dataset import Dataset
from survforest.models.evaluation import AucComparison, AucCurve
from survforest.models.step_function import ChfCurve

logger = get_logger(__name__)


def parse_grid(spec: str) -> np.ndarray:
    """
    Parse ``start:stop:step`` (stop included when aligned) or ``t1,t2,...``.

    Raises:
        ConfigError: malformed, empty or non-increasing grid
    """
    text = spec.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError("expected start:stop:step")
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            grid = start + step * np.arange(count, dtype=np.float64)
        else:
            grid = np.array([float(p) for p in text.split(",") if p.strip()], dtype=np.float64)
    except ValueError as e:
        raise ConfigError("Malformed grid specification", detail=f"{spec!r}: {e}") from e
    return check_grid(grid)


def check_grid(grid: Sequence[float] | np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64).ravel()
    if grid.size == 0:
        raise ConfigError("Evaluation grid is empty")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ConfigError("Evaluation grid must be strictly increasing")
    return grid


def _pair_auc(case_scores: np.ndarray, control_scores: np.ndarray) -> float:
    """Mann-Whitney estimate of P(case score > control score), ties counting 1/2."""
    n_cases, n_controls = case_scores.size, control_scores.size
    ranks = rankdata(np.concatenate([case_scores, control_scores]))
    u = ranks[:n_cases].sum() - n_cases * (n_cases + 1) / 2.0
    return float(u / (n_cases * n_controls))


def time_varying_auc(
    test: Dataset, predictions: Sequence[ChfCurve], grid: Sequence[float] | np.ndarray
) -> AucCurve:
    """
    AUC(t) of predicted cumulative hazards against observed outcomes.

    Args:
        test: observed times and event indicators
        predictions: one CHF per test record, in record order
        grid: strictly increasing evaluation times

    Returns:
        AucCurve with NaN where there are no cases or no controls

    Raises:
        DimensionMismatchError: prediction count differs from test records
        ConfigError: empty or non-increasing grid
    """
    if len(predictions) != test.n:
        raise DimensionMismatchError(
            "One prediction per test record is required", detail=f"{len(predictions)} != {test.n}"
        )
    grid = check_grid(grid)
    scores = np.vstack([np.asarray(chf(grid), dtype=np.float64).reshape(-1) for chf in predictions])

    auc = np.full(grid.size, np.nan)
    n_cases = np.zeros(grid.size, dtype=np.int64)
    n_controls = np.zeros(grid.size, dtype=np.int64)
    for k, t in enumerate(grid):
        cases = test.event & (test.time <= t)
        controls = test.time > t
        n_cases[k], n_controls[k] = int(cases.sum()), int(controls.sum())
        if n_cases[k] and n_controls[k]:
            auc[k] = _pair_auc(scores[cases, k], scores[controls, k])

    logger.debug(f"AUC evaluated on {grid.size} grid points ({int((~np.isnan(auc)).sum())} defined)")
    return AucCurve(grid=grid, auc=auc, n_cases=n_cases, n_controls=n_controls)


def integrated_auc(curve: AucCurve) -> float:
    """Mean AUC over the defined grid points (NaN if none)."""
    defined = curve.auc[curve.defined]
    return float(defined.mean()) if defined.size else float("nan")


def compare_auc(a: AucCurve, b: AucCurve) -> AucComparison:
    """
    Pointwise difference a - b and win counts.

    Grid points where either curve is undefined are excluded from every
    aggregate.

    Raises:
        ConfigError: the two grids differ
    """
    if a.grid.shape != b.grid.shape or not np.array_equal(a.grid, b.grid):
        raise ConfigError("AUC curves are on different grids")
    diff = a.auc - b.auc
    defined = ~np.isnan(diff)
    n_defined = int(defined.sum())
    n_wins = int((diff[defined] > 0).sum())
    table = pd.DataFrame({"t": a.grid, "auc_a": a.auc, "auc_b": b.auc, "diff": diff})
    return AucComparison(
        table=table,
        n_defined=n_defined,
        n_wins=n_wins,
        fraction_wins=n_wins / n_defined if n_defined else 0.0,
        mean_diff=float(diff[defined].mean()) if n_defined else float("nan"),
    )
