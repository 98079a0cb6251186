"""
Staged experiment runner.

Every command writes its files into ``<out>/.staging`` first. When all
stages succeed the files move into ``<out>``; when a stage fails they move
into ``<out>/quarantine`` instead. Either way ``<out>/manifest.json``
records the resolved config, seeds, package versions, per-stage timings
and the output inventory.
"""

import shutil
from contextlib import contextmanager
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel, ValidationError

from survforest.core.config import settings
from survforest.core.errors import ConfigError, DataValidationError, DimensionMismatchError
from survforest.core.flatconfig import flatten, read_flat, section, unflatten
from survforest.core.logging import get_logger, log_stage
from survforest.core.seeding import STREAM_CASE, STREAM_GLOBAL, derive_seed
from survforest.models.dataset import Dataset
from survforest.schemas.experiment import DataSource, ExperimentSpec, RunManifest, StageRecord, StageStatus
from survforest.schemas.forest import ForestConfig, SbrsfConfig
from survforest.schemas.simulation import SimConfig
from survforest.services import dataset_service, io_service
from survforest.services.evaluation_service import compare_auc, integrated_auc, parse_grid, time_varying_auc
from survforest.services.ipcw_service import ipcw_summary, ipcw_weights
from survforest.services.sbrsf_service import rsf_fit_predict, sbrsf_fit_predict, sbrsf_weights
from survforest.services.simgen_service import save_sim_config, simulate

logger = get_logger(__name__)

M = TypeVar("M", bound=BaseModel)


def package_versions() -> Dict[str, str]:
    versions = {settings.APP_NAME: settings.APP_VERSION}
    for name in settings.MANIFEST_PACKAGES:
        try:
            versions[name] = version(name)
        except PackageNotFoundError:
            versions[name] = "unknown"
    return versions


# ============================================================================
# CONFIG RESOLUTION
# ============================================================================


def parse_overrides(pairs: Optional[list[str]]) -> Dict[str, str]:
    """``["sim.n=10", ...]`` to a flat dict."""
    overrides: Dict[str, str] = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError("Overrides must look like key=value", detail=pair)
        overrides[key.strip()] = value.strip()
    return overrides


def validate_section(flat: Dict[str, str], prefix: str, model: Type[M]) -> M:
    """Validate the ``prefix.*`` keys of ``flat`` as ``model``."""
    try:
        return model.model_validate(unflatten(section(flat, prefix)))
    except ValidationError as e:
        raise ConfigError(f"Invalid {prefix}.* config", detail=str(e)) from e


def load_experiment(path: Optional[Path], overrides: Optional[Dict[str, str]] = None) -> ExperimentSpec:
    flat = read_flat(path) if path else {}
    flat.update(overrides or {})
    try:
        return ExperimentSpec.from_flat(flat)
    except (ValidationError, ValueError) as e:
        raise ConfigError("Invalid experiment config", detail=str(e)) from e


def paired_seeds(master: int) -> Dict[str, int]:
    """
    Seeds of every random component, derived from the master seed.

    RSF, the SB-RSF global forest and shared per-case forests use the same
    forest seed so the two methods are compared on paired draws.
    """
    return {
        "master": master,
        "sim": master,
        "split": master,
        "forest": derive_seed(master, STREAM_GLOBAL),
        "cases": derive_seed(master, STREAM_CASE),
    }


def seeded_forests(rsf: ForestConfig, sbrsf: SbrsfConfig, seeds: Dict[str, int]) -> Tuple[ForestConfig, SbrsfConfig]:
    forest_seed = seeds["forest"]
    sbrsf = sbrsf.model_copy(
        update={
            "global_forest": sbrsf.global_forest.with_seed(forest_seed),
            "per_case": sbrsf.per_case.with_seed(forest_seed),
            "seed": seeds["cases"],
        }
    )
    return rsf.with_seed(forest_seed), sbrsf


def resolve_experiment(spec: ExperimentSpec, seed: Optional[int] = None) -> Tuple[ExperimentSpec, Dict[str, int]]:
    """Apply the master seed (``seed`` overrides the file) to every component."""
    master = spec.seed if seed is None else seed
    seeds = paired_seeds(master)
    rsf, sbrsf = seeded_forests(spec.rsf, spec.sbrsf, seeds)
    update: Dict[str, Any] = {"seed": master, "rsf": rsf, "sbrsf": sbrsf}
    if spec.sim is not None:
        update["sim"] = spec.sim.model_copy(update={"seed": seeds["sim"]})
    return spec.model_copy(update=update), seeds


# ============================================================================
# RUN RECORDER
# ============================================================================


class RunRecorder:
    """
    Staging, quarantine and manifest bookkeeping for one command.

    Use as a context manager; stages run inside ``recorder.stage(name)``.
    """

    def __init__(
        self,
        command: str,
        out_dir: Path,
        config: Dict[str, str],
        seeds: Optional[Dict[str, int]] = None,
        workers: int = 1,
    ):
        self.out_dir = Path(out_dir)
        self.staging = self.out_dir / settings.STAGING_DIRNAME
        self.quarantine = self.out_dir / settings.QUARANTINE_DIRNAME
        self.manifest = RunManifest(
            command=command,
            started_at=datetime.now(timezone.utc),
            config=dict(config),
            seeds=dict(seeds or {}),
            versions=package_versions(),
            workers=workers,
        )

    def __enter__(self) -> "RunRecorder":
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            if self.staging.exists():
                shutil.rmtree(self.staging)
            self.staging.mkdir()
        except OSError as e:
            raise ConfigError("Output directory is not writable", detail=f"{self.out_dir}: {e}") from e
        logger.info(f"Running '{self.manifest.command}' into {self.out_dir}")
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        self._clear_previous()
        if exc is None:
            self._publish()
        else:
            self._quarantine(exc)
        self.manifest.save(self.out_dir / settings.MANIFEST_FILENAME)
        return False

    def path(self, name: str) -> Path:
        """Staging location of output file ``name``."""
        return self.staging / name

    @contextmanager
    def stage(self, name: str) -> Iterator[Dict[str, Any]]:
        """
        Run a stage, recording its timing, status and ``detail`` entries.

        Yields:
            dict the stage fills with values worth keeping in the manifest
        """
        detail: Dict[str, Any] = {}
        try:
            with log_stage(logger, name) as timer:
                yield detail
        except Exception as e:
            self.manifest.stages.append(
                StageRecord(name=name, status=StageStatus.FAILED, seconds=timer.seconds, detail=detail, error=str(e))
            )
            raise
        self.manifest.stages.append(
            StageRecord(name=name, status=StageStatus.SUCCEEDED, seconds=timer.seconds, detail=detail)
        )

    def _clear_previous(self) -> None:
        """
        Remove the outputs an earlier manifest in ``out_dir`` lists, and its quarantine.

        Runs after the stages, so inputs read from ``out_dir`` are still there
        while the command works.
        """
        previous = self.out_dir / settings.MANIFEST_FILENAME
        if previous.is_file():
            try:
                listed = [item.path for item in RunManifest.load(previous).outputs]
            except (OSError, ValidationError) as e:
                logger.warning(f"Ignoring unreadable previous manifest {previous}: {e}")
                listed = []
            root = self.out_dir.resolve()
            removed = 0
            for rel in listed:
                target = (self.out_dir / rel).resolve()
                if root not in target.parents or not target.is_file():
                    continue
                target.unlink()
                removed += 1
            if removed:
                logger.info(f"Removed {removed} output file(s) of the previous run in {self.out_dir}")
        if self.quarantine.exists():
            shutil.rmtree(self.quarantine)

    def _publish(self) -> None:
        self.manifest.outputs = io_service.inventory(self.staging)
        for item in self.manifest.outputs:
            target = self.out_dir / item.path
            target.parent.mkdir(parents=True, exist_ok=True)
            shutil.move(str(self.staging / item.path), str(target))
        shutil.rmtree(self.staging)
        self.manifest.status = StageStatus.SUCCEEDED
        logger.info(f"Wrote {len(self.manifest.outputs)} output file(s) to {self.out_dir}")

    def _quarantine(self, exc: BaseException) -> None:
        self.staging.rename(self.quarantine)
        prefix = settings.QUARANTINE_DIRNAME
        self.manifest.outputs = [
            item.model_copy(update={"path": f"{prefix}/{item.path}"}) for item in io_service.inventory(self.quarantine)
        ]
        self.manifest.status = StageStatus.FAILED
        self.manifest.quarantine = prefix
        logger.error(f"'{self.manifest.command}' failed: {exc}; partial outputs moved to {self.quarantine}")


# ============================================================================
# EXPERIMENT
# ============================================================================


def _load_data(spec: ExperimentSpec, recorder: RunRecorder, detail: Dict[str, Any]) -> Tuple[Dataset, Dataset]:
    if spec.data.source == DataSource.SIMULATE:
        result = simulate(spec.sim, workers=recorder.manifest.workers)
        io_service.write_frame(result.oracle, recorder.path("oracle.csv"))
        dataset_service.write_csv(result.dataset, recorder.path("dataset.csv"))
        detail.update(censoring_fraction=result.censoring_fraction)
        if result.c_max is not None:
            detail.update(c_max=result.c_max)
        data = result.dataset
    else:
        data = dataset_service.load_csv(spec.data.path, categorical=spec.data.categorical)
        if spec.data.test_path is not None:
            test = dataset_service.load_csv(
                spec.data.test_path, require_event=False, categorical=spec.data.categorical
            )
            if test.feature_names != data.feature_names:
                raise DimensionMismatchError("Train and test files have different covariates")
            return data, test

    return dataset_service.split_train_test(data, spec.split.fraction, spec.seed)


def run_experiment(
    spec: ExperimentSpec,
    out_dir: Path,
    workers: int = 1,
    seed: Optional[int] = None,
    command: str = "run",
) -> RunManifest:
    """
    RSF and SB-RSF on one split, evaluated on a shared grid.

    Writes train/test CSVs, per-method predictions and AUC curves, the
    pointwise comparison, a summary table and the AUC plot.

    Raises:
        SurvForestError: any stage failure (after quarantining outputs)
    """
    spec, seeds = resolve_experiment(spec, seed)
    recorder = RunRecorder(command, out_dir, spec.to_flat(), seeds, workers)

    with recorder:
        with recorder.stage("config") as detail:
            grid = parse_grid(spec.evaluation.grid)
            detail.update(grid_points=int(grid.size))

        with recorder.stage("data") as detail:
            train, test = _load_data(spec, recorder, detail)
            dataset_service.write_csv(train, recorder.path("train.csv"))
            dataset_service.write_csv(test, recorder.path("test.csv"))
            detail.update(n_train=train.n, n_test=test.n, train_events=train.n_events)

        with recorder.stage("rsf") as detail:
            rsf = rsf_fit_predict(train, test, spec.rsf, workers=workers)
            io_service.write_predictions(rsf, recorder.path("predictions_rsf.csv"))
            detail.update(n_trees=spec.rsf.n_trees)

        if spec.sbrsf.dependent_censoring:
            with recorder.stage("ipcw") as detail:
                ipcw = ipcw_weights(train)
                io_service.write_ipcw(ipcw, train.ids, recorder.path("ipcw.csv"))
                detail.update(ipcw_summary(ipcw))

        with recorder.stage("sbrsf") as detail:
            sbrsf = sbrsf_fit_predict(train, test, spec.sbrsf, workers=workers)
            io_service.write_predictions(sbrsf, recorder.path("predictions_sbrsf.csv"))
            detail.update(n_trees_global=spec.sbrsf.global_forest.n_trees, n_trees_per_case=spec.sbrsf.per_case.n_trees)

        with recorder.stage("evaluate") as detail:
            curves = {
                "rsf": time_varying_auc(test, rsf.per_test_chf, grid),
                "sbrsf": time_varying_auc(test, sbrsf.per_test_chf, grid),
            }
            for name, curve in curves.items():
                io_service.write_auc(curve, recorder.path(f"auc_{name}.csv"))
            comparison = compare_auc(curves["sbrsf"], curves["rsf"])
            io_service.write_comparison(comparison, recorder.path("comparison.csv"))
            summary = {
                "iauc_rsf": integrated_auc(curves["rsf"]),
                "iauc_sbrsf": integrated_auc(curves["sbrsf"]),
                **comparison.summary(),
            }
            io_service.write_summary([summary], recorder.path("summary.csv"))
            io_service.plot_auc({"RSF": curves["rsf"], "SB-RSF": curves["sbrsf"]}, recorder.path("auc.svg"))
            detail.update(summary)

    return recorder.manifest


def rerun_from_manifest(manifest_path: Path, out_dir: Path, workers: int = 1) -> RunManifest:
    """Run again from the config snapshot stored in a manifest."""
    try:
        manifest = RunManifest.load(Path(manifest_path))
    except (OSError, ValidationError) as e:
        raise ConfigError("Unreadable manifest", detail=f"{manifest_path}: {e}") from e
    if manifest.command != "run":
        raise ConfigError("Manifest is not from an experiment run", detail=manifest.command)
    try:
        spec = ExperimentSpec.from_flat(manifest.config)
    except (ValidationError, ValueError) as e:
        raise ConfigError("Manifest config no longer validates", detail=str(e)) from e
    return run_experiment(spec, out_dir, workers=workers, command="run")


# ============================================================================
# SINGLE-STEP COMMANDS
# ============================================================================


def _model_snapshot(seed: int, **models: BaseModel) -> Dict[str, str]:
    flat = {"seed": str(seed)}
    for prefix, model in models.items():
        flat.update(flatten(model.model_dump(mode="json", by_alias=True), prefix))
    return flat


def run_simulation(config: SimConfig, out_dir: Path, workers: int = 1) -> RunManifest:
    """Dataset CSV, oracle CSV and the resolved simulation config."""
    recorder = RunRecorder("simulate", out_dir, config.to_flat(), {"sim": config.seed}, workers)
    with recorder:
        with recorder.stage("simulate") as detail:
            result = simulate(config, workers=workers)
            dataset_service.write_csv(result.dataset, recorder.path("dataset.csv"))
            io_service.write_frame(result.oracle, recorder.path("oracle.csv"))
            save_sim_config(config, recorder.path("sim_config.env"))
            detail.update(n=result.dataset.n, censoring_fraction=result.censoring_fraction)
            if result.c_max is not None:
                detail.update(c_max=result.c_max)
    return recorder.manifest


def _load_pair(train_path: Path, test_path: Path, detail: Dict[str, Any]) -> Tuple[Dataset, Dataset]:
    train = dataset_service.load_csv(train_path)
    test = dataset_service.load_csv(test_path, require_event=False)
    if test.feature_names != train.feature_names:
        raise DimensionMismatchError("Train and test files have different covariates")
    detail.update(n_train=train.n, n_test=test.n)
    return train, test


def run_fit(
    train_path: Path, test_path: Path, flat: Dict[str, str], out_dir: Path, seed: int, workers: int = 1
) -> RunManifest:
    """Global forest similarity weights (and IPCW) for a train/test pair."""
    _, sbrsf = seeded_forests(ForestConfig(), validate_section(flat, "sbrsf", SbrsfConfig), paired_seeds(seed))
    recorder = RunRecorder("fit", out_dir, _model_snapshot(seed, sbrsf=sbrsf), paired_seeds(seed), workers)
    with recorder:
        with recorder.stage("data") as detail:
            train, test = _load_pair(train_path, test_path, detail)
        with recorder.stage("fit") as detail:
            weights, ipcw = sbrsf_weights(train, test, sbrsf, workers=workers)
            io_service.write_weights(weights, train.ids, test.ids, recorder.path("weights.csv"))
            if ipcw is not None:
                io_service.write_ipcw(ipcw, train.ids, recorder.path("ipcw.csv"))
                detail.update(ipcw=ipcw_summary(ipcw))
    return recorder.manifest


def run_predict(
    train_path: Path,
    test_path: Path,
    method: str,
    flat: Dict[str, str],
    out_dir: Path,
    seed: int,
    workers: int = 1,
) -> RunManifest:
    """Long-format CHF predictions from RSF or SB-RSF."""
    seeds = paired_seeds(seed)
    rsf, sbrsf = seeded_forests(
        validate_section(flat, "rsf", ForestConfig), validate_section(flat, "sbrsf", SbrsfConfig), seeds
    )
    snapshot = _model_snapshot(seed, rsf=rsf) if method == "rsf" else _model_snapshot(seed, sbrsf=sbrsf)
    recorder = RunRecorder(f"predict {method}", out_dir, snapshot, seeds, workers)
    with recorder:
        with recorder.stage("data") as detail:
            train, test = _load_pair(train_path, test_path, detail)
        with recorder.stage(method):
            if method == "rsf":
                prediction = rsf_fit_predict(train, test, rsf, workers=workers)
            else:
                prediction = sbrsf_fit_predict(train, test, sbrsf, workers=workers)
            io_service.write_predictions(prediction, recorder.path("predictions.csv"))
    return recorder.manifest


def _recorded_seed(seed: Optional[int]) -> Dict[str, int]:
    return {} if seed is None else {"master": seed}


def run_evaluate(
    predictions_path: Path,
    test_path: Path,
    grid_spec: str,
    out_dir: Path,
    seed: Optional[int] = None,
    workers: int = 1,
) -> RunManifest:
    """
    AUC(t) of stored predictions against a test file.

    Raises:
        DataValidationError: prediction and test ids do not match
        ConfigError: malformed grid
    """
    recorder = RunRecorder("evaluate", out_dir, {"eval.grid": grid_spec}, _recorded_seed(seed), workers)
    with recorder:
        with recorder.stage("evaluate") as detail:
            grid = parse_grid(grid_spec)
            curves = io_service.read_predictions(predictions_path)
            test = dataset_service.load_csv(test_path, require_event=False)
            if not set(test.ids) & set(curves):
                raise DataValidationError("Predictions share no ids with the test file")
            missing = [i for i in test.ids if i not in curves]
            extra = set(curves) - set(test.ids)
            if missing or extra:
                raise DataValidationError(
                    "Prediction ids do not match test ids",
                    detail=f"{len(missing)} test id(s) without prediction, {len(extra)} unknown prediction id(s)",
                )
            curve = time_varying_auc(test, [curves[i] for i in test.ids], grid)
            io_service.write_auc(curve, recorder.path("auc.csv"))
            detail.update(integrated_auc=integrated_auc(curve), grid_points=int(grid.size))
    return recorder.manifest


def run_compare(
    auc_a: Path,
    auc_b: Path,
    label_a: str,
    label_b: str,
    out_dir: Path,
    seed: Optional[int] = None,
    workers: int = 1,
) -> RunManifest:
    """Pointwise a - b comparison, summary and plot of two AUC CSVs."""
    recorder = RunRecorder(
        "compare", out_dir, {"compare.a": label_a, "compare.b": label_b}, _recorded_seed(seed), workers
    )
    with recorder:
        with recorder.stage("compare") as detail:
            a, b = io_service.read_auc(auc_a), io_service.read_auc(auc_b)
            comparison = compare_auc(a, b)
            io_service.write_comparison(comparison, recorder.path("comparison.csv"))
            summary = {f"iauc_{label_a}": integrated_auc(a), f"iauc_{label_b}": integrated_auc(b), **comparison.summary()}
            io_service.write_summary([summary], recorder.path("summary.csv"))
            io_service.plot_auc({label_a: a, label_b: b}, recorder.path("auc.svg"))
            detail.update(summary)
    return recorder.manifest
