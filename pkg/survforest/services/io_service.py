"""
Artifact I/O.

CSV writers and readers for predictions, AUC curves, comparisons, weight
matrices and IPCW vectors, the AUC-vs-time SVG plot, and file digests.
Floats are written with 17 significant digits and read back with pandas'
round-trip parser so a reload is bitwise exact.
"""

import hashlib
from collections import OrderedDict
from pathlib import Path
from typing import List, Mapping, Sequence

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from survforest.core.config import settings
from survforest.core.errors import DataValidationError
from survforest.models.evaluation import AucComparison, AucCurve
from survforest.models.forest import IpcwVector, WeightMatrix
from survforest.models.prediction import SbrsfPrediction
from survforest.models.step_function import ChfCurve, StepFunction
from survforest.schemas.experiment import OutputFile
from survforest.services.estimators import survival_from_chf


def write_frame(frame: pd.DataFrame, path: str | Path, index: bool = False) -> Path:
    path = Path(path)
    frame.to_csv(path, index=index, float_format=settings.CSV_FLOAT_FORMAT, na_rep="")
    return path


def read_frame(path: str | Path, **kwargs) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise DataValidationError("File not found", detail=str(path))
    return pd.read_csv(path, float_precision="round_trip", **kwargs)


# ==================== Predictions ====================


def predictions_frame(prediction: SbrsfPrediction) -> pd.DataFrame:
    """Long format: test_id, time, chf, survival (one row per jump)."""
    frames = []
    for test_id, chf in zip(prediction.test_ids, prediction.per_test_chf):
        survival = survival_from_chf(chf)
        frames.append(
            pd.DataFrame({"test_id": test_id, "time": chf.times, "chf": chf.values, "survival": survival.values})
        )
    return pd.concat(frames, ignore_index=True)


def write_predictions(prediction: SbrsfPrediction, path: str | Path) -> Path:
    return write_frame(predictions_frame(prediction), path)


def read_predictions(path: str | Path) -> "OrderedDict[str, ChfCurve]":
    """CHF per test id, in file order."""
    frame = read_frame(path, dtype={"test_id": str})
    missing = {"test_id", "time", "chf"} - set(frame.columns)
    if missing:
        raise DataValidationError("Prediction file lacks columns", detail=", ".join(sorted(missing)))
    curves: "OrderedDict[str, ChfCurve]" = OrderedDict()
    for test_id, group in frame.groupby("test_id", sort=False):
        curves[test_id] = StepFunction(
            times=group["time"].to_numpy(dtype=np.float64),
            values=group["chf"].to_numpy(dtype=np.float64),
        )
    return curves


# ==================== Evaluation ====================


def write_auc(curve: AucCurve, path: str | Path) -> Path:
    return write_frame(curve.to_frame(), path)


def read_auc(path: str | Path) -> AucCurve:
    return AucCurve.from_frame(read_frame(path))


def write_comparison(comparison: AucComparison, path: str | Path) -> Path:
    return write_frame(comparison.table, path)


def write_summary(rows: Sequence[Mapping[str, object]], path: str | Path) -> Path:
    return write_frame(pd.DataFrame(list(rows)), path)


def plot_auc(curves: Mapping[str, AucCurve], path: str | Path, title: str = "Time-varying AUC") -> Path:
    """
    AUC(t) lines, one per method, as a self-contained SVG.

    Hash salt and date metadata are fixed so identical curves give
    identical bytes.
    """
    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": settings.PLOT_HASH_SALT, "svg.fonttype": "path"}):
        fig = Figure(figsize=(7, 4.5))
        ax = fig.subplots()
        for label, curve in curves.items():
            ax.plot(curve.grid, curve.auc, marker="o", markersize=3, label=label)
        ax.set_xlabel("Time")
        ax.set_ylabel("AUC(t)")
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


# ==================== Weights ====================


def write_weights(weights: WeightMatrix, train_ids: Sequence[str], test_ids: Sequence[str], path: str | Path) -> Path:
    return write_frame(weights.to_frame(train_ids, test_ids), path, index=True)


def read_weights(path: str | Path) -> tuple[WeightMatrix, List[str], List[str]]:
    frame = read_frame(path, dtype={"train_id": str}).set_index("train_id")
    return WeightMatrix(frame.to_numpy(dtype=np.float64)), list(frame.index), [str(c) for c in frame.columns]


def write_ipcw(ipcw: IpcwVector, train_ids: Sequence[str], path: str | Path) -> Path:
    return write_frame(ipcw.to_frame(train_ids), path)


# ==================== Inventory ====================


def sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def inventory(root: Path) -> List[OutputFile]:
    """Every file under ``root`` with its digest, sorted by relative path."""
    files = sorted(p for p in root.rglob("*") if p.is_file())
    return [
        OutputFile(path=p.relative_to(root).as_posix(), sha256=sha256(p), bytes=p.stat().st_size) for p in files
    ]

