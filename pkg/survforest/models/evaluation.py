"""
Evaluation models.
Time-varying AUC curves and their pairwise comparison table.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd


@dataclass(frozen=True, eq=False)
class AucCurve:
    """
    AUC(t) over a time grid.

    ``auc`` is NaN exactly where n_cases * n_controls == 0 (undefined).
    """

    grid: np.ndarray
    auc: np.ndarray
    n_cases: np.ndarray
    n_controls: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.auc)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": self.grid,
                "auc": self.auc,
                "n_cases": self.n_cases.astype(np.int64),
                "n_controls": self.n_controls.astype(np.int64),
            }
        )

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "AucCurve":
        return cls(
            grid=frame["t"].to_numpy(dtype=np.float64),
            auc=frame["auc"].to_numpy(dtype=np.float64),
            n_cases=frame["n_cases"].to_numpy(dtype=np.int64),
            n_controls=frame["n_controls"].to_numpy(dtype=np.int64),
        )


@dataclass(frozen=True, eq=False)
class AucComparison:
    """Pointwise a - b with summary counts over grid points defined in both."""

    table: pd.DataFrame  # t, auc_a, auc_b, diff
    n_defined: int
    n_wins: int
    fraction_wins: float
    mean_diff: float

    def summary(self) -> dict:
        return {
            "n_defined": self.n_defined,
            "n_wins": self.n_wins,
            "fraction_wins": self.fraction_wins,
            "mean_diff": self.mean_diff,
        }
