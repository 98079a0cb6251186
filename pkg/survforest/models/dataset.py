"""
Survival dataset model.
Defines the immutable containers for right-censored survival data.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from survforest.core.errors import DataValidationError


@dataclass(frozen=True)
class SurvivalRecord:
    """
    One subject: observed time, event indicator and covariates.

    ``time`` is min(event time, censoring time); ``event`` is True when the
    observed time is the event time.
    """

    time: float
    event: bool
    covariates: Tuple[float, ...]
    id: str = ""


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Right-censored survival data held column-wise.

    Attributes:
        time: (n,) observed times, finite and nonnegative
        event: (n,) event indicators
        covariates: (n, p) covariate matrix
        feature_names: p column identifiers
        ids: n record identifiers
    """

    time: np.ndarray
    event: np.ndarray
    covariates: np.ndarray
    feature_names: Tuple[str, ...]
    ids: Tuple[str, ...] = field(default=())
    require_event: bool = field(default=True, repr=False)

    def __post_init__(self):
        time = np.array(self.time, dtype=np.float64)
        event = np.array(self.event, dtype=bool)
        covariates = np.array(self.covariates, dtype=np.float64)
        if covariates.ndim == 1:
            covariates = covariates.reshape(-1, 1)

        n = time.shape[0]
        if time.ndim != 1 or n == 0:
            raise DataValidationError("Dataset must contain at least one record")
        if event.shape != (n,) or covariates.shape[0] != n:
            raise DataValidationError(
                "Column lengths disagree",
                detail=f"time={n}, event={event.shape[0]}, covariates={covariates.shape[0]}",
            )
        if covariates.shape[1] == 0:
            raise DataValidationError("Dataset needs at least one covariate column")
        if len(self.feature_names) != covariates.shape[1]:
            raise DataValidationError(
                "Feature name count does not match covariate dimension",
                detail=f"{len(self.feature_names)} names for {covariates.shape[1]} columns",
            )
        if not np.all(np.isfinite(time)) or np.any(time < 0):
            bad = int(np.flatnonzero(~np.isfinite(time) | (time < 0))[0])
            raise DataValidationError("Observed times must be finite and nonnegative", detail=f"row {bad}")
        if not np.all(np.isfinite(covariates)):
            raise DataValidationError("Covariates must be finite")
        if self.require_event and not event.any():
            raise DataValidationError("Dataset needs at least one observed event")

        ids = tuple(self.ids) if self.ids else tuple(str(i) for i in range(n))
        if len(ids) != n:
            raise DataValidationError("Record id count does not match record count")

        object.__setattr__(self, "time", _readonly(time))
        object.__setattr__(self, "event", _readonly(event))
        object.__setattr__(self, "covariates", _readonly(covariates))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return int(self.time.shape[0])

    @property
    def p(self) -> int:
        return int(self.covariates.shape[1])

    @property
    def n_events(self) -> int:
        return int(self.event.sum())

    @property
    def records(self) -> List[SurvivalRecord]:
        return [
            SurvivalRecord(float(t), bool(e), tuple(float(v) for v in x), rid)
            for t, e, x, rid in zip(self.time, self.event, self.covariates, self.ids)
        ]

    def subset(
        self, indices: Sequence[int] | np.ndarray, require_event: bool = True
    ) -> "Dataset":
        """Sub-dataset of the given rows, in the given order."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            time=self.time[idx],
            event=self.event[idx],
            covariates=self.covariates[idx],
            feature_names=self.feature_names,
            ids=tuple(self.ids[i] for i in idx),
            require_event=require_event,
        )

    @classmethod
    def from_records(
        cls,
        records: Sequence[SurvivalRecord],
        feature_names: Sequence[str] | None = None,
        require_event: bool = True,
    ) -> "Dataset":
        if not records:
            raise DataValidationError("Dataset must contain at least one record")
        width = len(records[0].covariates)
        if any(len(r.covariates) != width for r in records):
            raise DataValidationError("Records disagree on covariate dimension")
        names = tuple(feature_names) if feature_names else tuple(f"x{i + 1}" for i in range(width))
        ids = tuple(r.id or str(i) for i, r in enumerate(records))
        return cls(
            time=np.array([r.time for r in records], dtype=np.float64),
            event=np.array([r.event for r in records], dtype=bool),
            covariates=np.array([r.covariates for r in records], dtype=np.float64).reshape(len(records), width),
            feature_names=names,
            ids=ids,
            require_event=require_event,
        )
