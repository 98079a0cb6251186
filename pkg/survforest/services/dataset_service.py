"""
Dataset service.
CSV ingestion and export of survival data, and the train/test split.
"""

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from survforest.core.config import settings
from survforest.core.errors import ConfigError, DataValidationError
from survforest.core.logging import get_logger
from survforest.core.seeding import STREAM_SPLIT, make_rng
from survforest.models.dataset import Dataset
from survforest.schemas.dataset import CsvSchema, FeatureKind, FeatureSpec

logger = get_logger(__name__)


def infer_schema(
    columns: Iterable[str],
    time_col: str = "time",
    event_col: str = "event",
    id_col: Optional[str] = "id",
    categorical: Sequence[str] = (),
) -> CsvSchema:
    """
    Schema naming every column other than time/event/id as a covariate.

    Columns listed in ``categorical`` are one-hot encoded at load time.
    """
    columns = list(columns)
    if id_col not in columns:
        id_col = None
    roles = {time_col, event_col, id_col}
    unknown = set(categorical) - set(columns)
    if unknown:
        raise ConfigError("Categorical columns not present in file", detail=", ".join(sorted(unknown)))
    covariates = [
        FeatureSpec(name=c, kind=FeatureKind.CATEGORICAL if c in categorical else FeatureKind.NUMERIC)
        for c in columns
        if c not in roles
    ]
    return CsvSchema(time_col=time_col, event_col=event_col, id_col=id_col, covariates=covariates)


def _to_float(values: pd.Series, message: str) -> np.ndarray:
    # Python's float() parses the 17-digit text written by write_csv exactly
    out = np.empty(len(values), dtype=np.float64)
    for row, text in enumerate(values):
        try:
            out[row] = float(text)
        except ValueError as e:
            raise DataValidationError(message, detail=f"row {row}: {text!r}") from e
    return out


def _parse_event(values: pd.Series) -> np.ndarray:
    event = _to_float(values, "Invalid event indicator")
    bad = ~np.isin(event, (0.0, 1.0))
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise DataValidationError("Invalid event indicator", detail=f"row {row}: {values.iloc[row]!r}")
    return event == 1.0


def _one_hot(values: pd.Series, spec: FeatureSpec) -> Tuple[List[str], np.ndarray]:
    levels = list(spec.categories) if spec.categories else sorted(values.unique())
    unknown = sorted(set(values.unique()) - set(levels))
    if unknown:
        raise DataValidationError(f"Unknown level in categorical column {spec.name!r}", detail=", ".join(unknown))
    codes = pd.Categorical(values, categories=levels).codes
    indicators = np.zeros((len(values), len(levels)), dtype=np.float64)
    indicators[np.arange(len(values)), codes] = 1.0
    return spec.indicator_names(levels), indicators


def load_csv(
    path: str | Path,
    schema: CsvSchema | None = None,
    require_event: bool = True,
    categorical: Sequence[str] = (),
) -> Dataset:
    """
    Load and validate a survival CSV.

    Args:
        path: UTF-8, comma-separated file with a header row
        schema: column roles; inferred from the header when omitted
        require_event: reject files without any observed event
        categorical: columns to one-hot encode when the schema is inferred

    Returns:
        Dataset in file row order, categorical columns expanded to indicators

    Raises:
        DataValidationError: missing file, missing cell, non-numeric time,
            invalid event indicator, zero covariate columns, ...
    """
    path = Path(path)
    if not path.is_file():
        raise DataValidationError("Data file not found", detail=str(path))

    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    frame = frame.apply(lambda col: col.str.strip())
    schema = schema or infer_schema(frame.columns, categorical=categorical)
    if not schema.covariates:
        raise DataValidationError("Dataset needs at least one covariate column", detail=str(path))

    needed = [schema.time_col, schema.event_col] + [f.name for f in schema.covariates]
    if schema.id_col:
        needed.append(schema.id_col)
    absent = [c for c in needed if c not in frame.columns]
    if absent:
        raise DataValidationError("Columns missing from file", detail=", ".join(absent))
    if frame.empty:
        raise DataValidationError("Dataset must contain at least one record", detail=str(path))

    blank = frame[needed] == ""
    if blank.to_numpy().any():
        row, col = np.argwhere(blank.to_numpy())[0]
        raise DataValidationError("Missing value", detail=f"row {row}, column {needed[col]!r}")

    if schema.id_col and frame[schema.id_col].duplicated().any():
        dup = frame[schema.id_col][frame[schema.id_col].duplicated()].iloc[0]
        raise DataValidationError("Duplicate record id", detail=repr(dup))

    time = _to_float(frame[schema.time_col], "Non-numeric time")
    event = _parse_event(frame[schema.event_col])

    names: List[str] = []
    blocks: List[np.ndarray] = []
    for spec in schema.covariates:
        if spec.kind == FeatureKind.CATEGORICAL:
            cols, block = _one_hot(frame[spec.name], spec)
        else:
            cols, block = [spec.name], _to_float(frame[spec.name], f"Non-numeric covariate {spec.name!r}")[:, None]
        names.extend(cols)
        blocks.append(block)

    n_zero = int((time == 0).sum())
    if n_zero:
        logger.warning(f"{n_zero} record(s) in {path.name} have time 0")

    data = Dataset(
        time=time,
        event=event,
        covariates=np.hstack(blocks),
        feature_names=tuple(names),
        ids=tuple(frame[schema.id_col]) if schema.id_col else (),
        require_event=require_event,
    )
    logger.info(f"Loaded {data.n} records ({data.n_events} events, {data.p} covariates) from {path.name}")
    return data


def to_frame(data: Dataset) -> pd.DataFrame:
    columns: Dict[str, object] = {"id": list(data.ids), "time": data.time, "event": data.event.astype(np.int64)}
    for k, name in enumerate(data.feature_names):
        columns[name] = data.covariates[:, k]
    return pd.DataFrame(columns)


def write_csv(data: Dataset, path: str | Path) -> Path:
    """Write ``id,time,event,<features>`` with 17 significant digits."""
    path = Path(path)
    to_frame(data).to_csv(path, index=False, float_format=settings.CSV_FLOAT_FORMAT)
    return path


def split_train_test(data: Dataset, fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """
    Random train/test partition; each part keeps the original row order.

    Raises:
        ConfigError: fraction outside (0, 1)
        DataValidationError: a part would be empty, or training has no events
    """
    if not 0.0 < fraction < 1.0:
        raise ConfigError("Split fraction must lie in (0, 1)", detail=str(fraction))
    n_train = int(round(fraction * data.n))
    if n_train == 0 or n_train == data.n:
        raise DataValidationError(
            "Split leaves an empty part", detail=f"fraction={fraction}, n={data.n}, n_train={n_train}"
        )
    order = make_rng(seed, STREAM_SPLIT).permutation(data.n)
    train_idx, test_idx = np.sort(order[:n_train]), np.sort(order[n_train:])
    if not data.event[train_idx].any():
        raise DataValidationError("Training part contains no events", detail=f"seed={seed}")
    train = data.subset(train_idx)
    test = data.subset(test_idx, require_event=False)
    logger.info(f"Split {data.n} records into {train.n} train / {test.n} test (seed {seed})")
    return train, test
