"""
Survival forest toolkit - command definitions.

Subcommands:
- simulate: synthetic datasets from a simulation config
- run: RSF vs SB-RSF experiment with evaluation, plot and manifest
- fit: similarity weight matrix (and IPCW) for a train/test pair
- predict: RSF or SB-RSF cumulative hazard predictions
- evaluate: time-varying AUC of stored predictions
- compare: pointwise comparison and plot of two AUC curves
"""

from enum import Enum
from functools import wraps
from pathlib import Path
from typing import Annotated, List, Optional

import typer

from survforest.cli import runner
from survforest.core.config import settings
from survforest.core.errors import ConfigError, SurvForestError
from survforest.core.flatconfig import read_flat
from survforest.core.logging import get_logger
from survforest.schemas.experiment import RunManifest
from survforest.services.simgen_service import sim_config_from_flat

logger = get_logger(__name__)

app = typer.Typer(
    name=settings.APP_NAME,
    help="Similarity-based random survival forests: simulate, fit, predict, evaluate, compare.",
    no_args_is_help=True,
    add_completion=False,
)

# Shared options
SeedOpt = Annotated[Optional[int], typer.Option("--seed", min=0, help="Master seed; overrides the config file")]
WorkersOpt = Annotated[int, typer.Option("--workers", min=1, help="Parallel workers; results do not depend on it")]
OutOpt = Annotated[Path, typer.Option("--out", help="Output directory")]
ConfigOpt = Annotated[Optional[Path], typer.Option("--config", help="Flat key=value config file")]
SetOpt = Annotated[Optional[List[str]], typer.Option("--set", help="key=value override; repeatable")]
# evaluate and compare draw no random numbers and run in one process; these
# two are accepted so every subcommand takes the same flags, and only recorded
RecordedSeedOpt = Annotated[
    Optional[int], typer.Option("--seed", min=0, help="Recorded in the manifest only; nothing here is random")
]
RecordedWorkersOpt = Annotated[
    int, typer.Option("--workers", min=1, help="Recorded in the manifest only; this step runs in one process")
]
TrainOpt = Annotated[Path, typer.Option("--train", help="Training CSV (id,time,event,covariates)")]
TestOpt = Annotated[Path, typer.Option("--test", help="Test CSV")]


class Method(str, Enum):
    RSF = "rsf"
    SBRSF = "sbrsf"


def exits_on_error(command):
    """Turn toolkit errors into a logged message and exit status 1."""

    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except SurvForestError as e:
            logger.error(f"{type(e).__name__}: {e}")
            raise typer.Exit(code=1) from e

    return wrapper


def _report(manifest: RunManifest, out: Path) -> None:
    typer.echo(f"{manifest.command}: {manifest.status.value}, {len(manifest.outputs)} file(s) in {out}")


def _flat(config: Optional[Path], overrides: Optional[List[str]]) -> dict:
    flat = read_flat(config) if config else {}
    flat.update(runner.parse_overrides(overrides))
    return flat


def _master_seed(seed: Optional[int], flat: dict) -> int:
    if seed is not None:
        return seed
    try:
        return int(flat.get("seed", 0))
    except ValueError as e:
        raise ConfigError("seed must be an integer", detail=flat.get("seed")) from e


# ============================================================================
# DATA
# ============================================================================


@app.command()
@exits_on_error
def simulate(
    config: Annotated[Path, typer.Option("--config", help="Simulation config (sim.* keys or sim.preset)")],
    out: OutOpt = Path("out/simulate"),
    seed: SeedOpt = None,
    workers: WorkersOpt = settings.WORKERS,
    overrides: SetOpt = None,
):
    """
    Generate a synthetic dataset.

    Writes dataset.csv, oracle.csv (latent times and subspace ids),
    sim_config.env and manifest.json.
    """
    flat = _flat(config, overrides)
    if seed is not None:
        flat["sim.seed"] = str(seed)
    manifest = runner.run_simulation(sim_config_from_flat(flat), out, workers=workers)
    _report(manifest, out)


# ============================================================================
# EXPERIMENTS
# ============================================================================


@app.command()
@exits_on_error
def run(
    config: ConfigOpt = None,
    from_manifest: Annotated[
        Optional[Path], typer.Option("--from-manifest", help="Rerun the config snapshot of a manifest")
    ] = None,
    out: Annotated[Optional[Path], typer.Option("--out", help="Output directory")] = None,
    seed: SeedOpt = None,
    workers: WorkersOpt = settings.WORKERS,
    overrides: SetOpt = None,
):
    """
    Compare RSF and SB-RSF on one train/test split.

    Outputs predictions, AUC curves per method, comparison.csv,
    summary.csv, auc.svg and manifest.json. Failed runs leave their
    partial outputs under quarantine/ and exit with status 1.
    """
    if from_manifest is not None:
        if config is not None or overrides or seed is not None:
            raise ConfigError("--from-manifest cannot be combined with --config, --set or --seed")
        target = out or Path("out/run")
        manifest = runner.rerun_from_manifest(from_manifest, target, workers=workers)
    else:
        spec = runner.load_experiment(config, runner.parse_overrides(overrides))
        target = out or spec.out or Path("out/run")
        manifest = runner.run_experiment(spec, target, workers=workers, seed=seed)
    _report(manifest, target)


@app.command()
@exits_on_error
def fit(
    train: TrainOpt,
    test: TestOpt,
    config: ConfigOpt = None,
    out: OutOpt = Path("out/fit"),
    seed: SeedOpt = None,
    workers: WorkersOpt = settings.WORKERS,
    overrides: SetOpt = None,
):
    """
    Fit the global forest and write the similarity weight matrix.

    Reads sbrsf.* keys; with sbrsf.dependent_censoring=true the weights
    include IPCW and ipcw.csv is written too.
    """
    flat = _flat(config, overrides)
    manifest = runner.run_fit(train, test, flat, out, _master_seed(seed, flat), workers=workers)
    _report(manifest, out)


@app.command()
@exits_on_error
def predict(
    train: TrainOpt,
    test: TestOpt,
    method: Annotated[Method, typer.Option("--method", help="rsf or sbrsf")] = Method.SBRSF,
    config: ConfigOpt = None,
    out: OutOpt = Path("out/predict"),
    seed: SeedOpt = None,
    workers: WorkersOpt = settings.WORKERS,
    overrides: SetOpt = None,
):
    """Predict cumulative hazards for every test record (predictions.csv)."""
    flat = _flat(config, overrides)
    manifest = runner.run_predict(train, test, method.value, flat, out, _master_seed(seed, flat), workers=workers)
    _report(manifest, out)


# ============================================================================
# EVALUATION
# ============================================================================


@app.command()
@exits_on_error
def evaluate(
    predictions: Annotated[Path, typer.Option("--predictions", help="Long-format predictions CSV")],
    test: TestOpt,
    grid: Annotated[str, typer.Option("--grid", help="start:stop:step or t1,t2,...")] = settings.DEFAULT_GRID,
    out: OutOpt = Path("out/evaluate"),
    seed: RecordedSeedOpt = None,
    workers: RecordedWorkersOpt = settings.WORKERS,
    config: Annotated[Optional[Path], typer.Option("--config", help="Config file whose eval.grid is used")] = None,
):
    """Time-varying AUC of stored predictions (auc.csv)."""
    if config is not None:
        grid = read_flat(config).get("eval.grid", grid)
    manifest = runner.run_evaluate(predictions, test, grid, out, seed=seed, workers=workers)
    _report(manifest, out)


@app.command()
@exits_on_error
def compare(
    a: Annotated[Path, typer.Option("--a", help="AUC CSV of the first method")],
    b: Annotated[Path, typer.Option("--b", help="AUC CSV of the second method")],
    label_a: Annotated[Optional[str], typer.Option("--label-a", help="Label of --a (default sbrsf)")] = None,
    label_b: Annotated[Optional[str], typer.Option("--label-b", help="Label of --b (default rsf)")] = None,
    out: OutOpt = Path("out/compare"),
    seed: RecordedSeedOpt = None,
    workers: RecordedWorkersOpt = settings.WORKERS,
    config: Annotated[
        Optional[Path], typer.Option("--config", help="Config file whose compare.a / compare.b keys name the curves")
    ] = None,
):
    """Pointwise a - b AUC difference, win summary and plot."""
    flat = read_flat(config) if config is not None else {}
    label_a = label_a or flat.get("compare.a", "sbrsf")
    label_b = label_b or flat.get("compare.b", "rsf")
    if label_a == label_b:
        raise ConfigError("Curve labels must differ", detail=label_a)
    manifest = runner.run_compare(a, b, label_a, label_b, out, seed=seed, workers=workers)
    _report(manifest, out)
