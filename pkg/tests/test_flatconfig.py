"""
Tests for flat config files, experiment specs and seed derivation.
"""

import numpy as np
import pytest

from survforest.cli.runner import load_experiment, paired_seeds, parse_overrides, resolve_experiment
from survforest.core.errors import ConfigError
from survforest.core.flatconfig import flatten, read_flat, section, unflatten, write_flat
from survforest.core.seeding import STREAM_CASE, derive_seed, make_rng
from survforest.schemas.experiment import DataSource, ExperimentSpec
from survforest.schemas.forest import CaseSeedMode


# ==================== Flat files ====================


def test_flatten_and_unflatten():
    nested = {"a": {"b": 1.5, "c": {"d": True}}, "e": [0.25, 2], "f": None}
    flat = flatten(nested)
    assert flat == {"a.b": "1.5", "a.c.d": "true", "e": "0.25,2"}
    assert unflatten(flat) == {"a": {"b": "1.5", "c": {"d": "true"}}, "e": "0.25,2"}


def test_unflatten_rejects_conflicting_keys():
    with pytest.raises(ConfigError):
        unflatten({"a": "1", "a.b": "2"})
    with pytest.raises(ConfigError):
        unflatten({"a.b": "2", "a": "1"})


def test_section():
    assert section({"sim.n": "5", "sim.model.node.0": "leaf", "seed": "1"}, "sim") == {"n": "5", "model.node.0": "leaf"}


def test_read_and_write_flat(tmp_path):
    path = tmp_path / "cfg.env"
    path.write_text("# comment\nseed=3\nrsf.n_trees=10\nsbrsf.threshold=\n", encoding="utf-8")
    assert read_flat(path) == {"seed": "3", "rsf.n_trees": "10"}
    out = write_flat({"b": "2", "a": "1"}, tmp_path / "out.env", header="test")
    assert out.read_text(encoding="utf-8") == "# test\na=1\nb=2\n"
    assert read_flat(out) == {"a": "1", "b": "2"}


def test_read_flat_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        read_flat(tmp_path / "absent.env")


def test_parse_overrides():
    assert parse_overrides(["a.b=1", "c=x=y"]) == {"a.b": "1", "c": "x=y"}
    assert parse_overrides(None) == {}
    with pytest.raises(ConfigError):
        parse_overrides(["novalue"])


# ==================== Experiment specs ====================


@pytest.mark.parametrize("name", ["experiment_example1.env", "experiment_example2.env", "experiment_dependent.env"])
def test_shipped_experiment_configs_load(config_dir, name):
    spec = load_experiment(config_dir / name)
    assert spec.data.source == DataSource.SIMULATE
    assert spec.sim is not None and spec.sim.n == 1000
    assert spec.split.fraction == 0.7
    assert spec.evaluation.grid == "1:20:1"
    assert spec.rsf.n_trees == spec.sbrsf.global_forest.n_trees == spec.sbrsf.per_case.n_trees == 200


def test_dependent_experiment_enables_ipcw(config_dir):
    assert load_experiment(config_dir / "experiment_dependent.env").sbrsf.dependent_censoring


def test_experiment_flat_round_trip(config_dir):
    spec = load_experiment(
        config_dir / "experiment_example2.env",
        {"sbrsf.threshold": "0.05", "sbrsf.case_seeds": "shared", "rsf.tree.mtry": "2"},
    )
    assert spec.sbrsf.threshold == 0.05
    assert spec.sbrsf.case_seeds == CaseSeedMode.SHARED
    assert ExperimentSpec.from_flat(spec.to_flat()) == spec


def test_experiment_validation():
    with pytest.raises(ConfigError):
        load_experiment(None, {"data.source": "simulate"})
    with pytest.raises(ConfigError):
        load_experiment(None, {"data.source": "csv"})
    with pytest.raises(ConfigError):
        load_experiment(None, {"data.source": "csv", "data.path": "x.csv", "split.fraction": "1.5"})
    with pytest.raises(ConfigError):
        load_experiment(None, {"data.source": "csv", "data.path": "x.csv", "sbrsf.threshold": "1.0"})


def test_csv_experiment_categorical_list():
    spec = load_experiment(None, {"data.source": "csv", "data.path": "x.csv", "data.categorical": "grp, site"})
    assert spec.data.categorical == ["grp", "site"]


def test_resolve_experiment_pairs_forest_seeds(config_dir):
    spec, seeds = resolve_experiment(load_experiment(config_dir / "experiment_example1.env"), seed=7)
    assert seeds == paired_seeds(7)
    assert spec.seed == 7 and spec.sim.seed == 7
    assert spec.rsf.seed == spec.sbrsf.global_forest.seed == spec.sbrsf.per_case.seed == seeds["forest"]
    assert spec.sbrsf.seed == seeds["cases"]
    again, _ = resolve_experiment(spec)
    assert again == spec


# ==================== Seeds ====================


def test_derived_seeds_are_stable_and_distinct():
    assert derive_seed(1, 2, STREAM_CASE) == derive_seed(1, 2, STREAM_CASE)
    assert derive_seed(1, 2, STREAM_CASE) != derive_seed(1, 3, STREAM_CASE)
    assert derive_seed(1, "simulate") != derive_seed(2, "simulate")
    assert 0 <= derive_seed(123, 4) < 2**63


def test_make_rng_streams():
    a = make_rng(5, 0, 1).random(4)
    assert np.array_equal(a, make_rng(5, 0, 1).random(4))
    assert not np.array_equal(a, make_rng(5, 1, 0).random(4))
    with pytest.raises(ValueError):
        make_rng(5, -1)
