"""
Prediction model.
Per-test-case ensemble CHFs with the weights they were sampled under.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

from survforest.models.forest import IpcwVector, WeightMatrix
from survforest.models.step_function import ChfCurve


@dataclass(frozen=True, eq=False)
class SbrsfPrediction:
    """One ensemble CHF per test case plus the sampling weight matrix used."""

    per_test_chf: Tuple[ChfCurve, ...]
    weight_matrix: WeightMatrix
    test_ids: Tuple[str, ...]
    ipcw: Optional[IpcwVector] = None

    def __post_init__(self):
        if len(self.per_test_chf) != len(self.test_ids):
            raise ValueError("one CHF per test case is required")
        if self.weight_matrix.shape[1] != len(self.test_ids):
            raise ValueError("weight matrix columns must match test cases")

    def __len__(self) -> int:
        return len(self.per_test_chf)

