"""
Right-continuous piecewise-constant functions on [0, inf).

Houses Kaplan-Meier survival curves, Nelson-Aalen cumulative hazards and
ensemble cumulative hazards.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd


@dataclass(frozen=True, eq=False)
class StepFunction:
    """
    Piecewise-constant function with jumps at ``times``.

    Evaluating at t returns the value at the largest jump point <= t, or
    ``baseline`` when t precedes every jump. Past the last jump the last
    value holds.
    """

    times: np.ndarray
    values: np.ndarray
    baseline: float = 0.0

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64).ravel()
        values = np.array(self.values, dtype=np.float64).ravel()
        if times.shape != values.shape:
            raise ValueError("times and values must have the same length")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("jump times must be strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "baseline", float(self.baseline))

    def _lookup(self, t, side: str) -> np.ndarray | float:
        t_arr = np.asarray(t, dtype=np.float64)
        if self.times.size == 0:
            out = np.full(t_arr.shape, self.baseline)
        else:
            pos = np.searchsorted(self.times, t_arr, side=side) - 1
            out = np.where(pos >= 0, self.values[np.clip(pos, 0, None)], self.baseline)
        if out.ndim == 0:
            return float(out)
        return out

    def __call__(self, t: float | Sequence[float] | np.ndarray) -> np.ndarray | float:
        return self._lookup(t, "right")

    def left_limit(self, t: float | Sequence[float] | np.ndarray) -> np.ndarray | float:
        """Value just before ``t`` (the jump at ``t`` itself excluded)."""
        return self._lookup(t, "left")

    def map_values(self, func) -> "StepFunction":
        """Apply ``func`` pointwise to the values and the baseline."""
        return StepFunction(self.times, func(self.values), float(func(np.float64(self.baseline))))

    def to_frame(self, value_name: str = "value") -> pd.DataFrame:
        """Two-column (time, value) frame for CSV export."""
        return pd.DataFrame({"time": self.times, value_name: self.values})

    def __len__(self) -> int:
        return int(self.times.size)

    def equals(self, other: "StepFunction") -> bool:
        """Exact equality of jumps, values and baseline."""
        return (
            self.baseline == other.baseline
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
        )


# A cumulative hazard curve: baseline 0, nonnegative non-decreasing values
ChfCurve = StepFunction


def ensemble_mean(curves: Sequence[StepFunction]) -> StepFunction:
    """
    Pointwise mean of step functions over the union of their jump points.

    Exact: every curve is evaluated at every union jump with constant
    interpolation, so no discretization error is introduced.
    """
    if not curves:
        raise ValueError("ensemble_mean needs at least one curve")
    if len(curves) == 1:
        only = curves[0]
        return StepFunction(only.times.copy(), only.values.copy(), only.baseline)
    grid = np.unique(np.concatenate([c.times for c in curves]))
    stacked = np.vstack([np.asarray(c(grid), dtype=np.float64).reshape(-1) for c in curves])
    baseline = float(np.mean([c.baseline for c in curves]))
    return StepFunction(grid, stacked.mean(axis=0), baseline)
