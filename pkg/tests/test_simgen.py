"""
Tests for the synthetic survival data generator.
"""

import numpy as np
import pytest
from scipy.stats import kstest, weibull_min

from survforest.core.errors import ConfigError, DimensionMismatchError
from survforest.schemas.simulation import (
    CensoringKind,
    CensoringSpec,
    NodeKind,
    SimConfig,
    SubspaceModel,
    SubspaceNode,
)
from survforest.services.simgen_service import (
    EXAMPLE1_MODEL,
    calibrate_uniform_censoring,
    example1_config,
    example1_dependent_config,
    example2_default,
    linear_predictor_ex1,
    load_sim_config,
    preset_config,
    save_sim_config,
    sim_config_from_flat,
    simulate,
    weibull_mean,
)


def _constant_config(n: int, seed: int, intercept: float = np.log(2.0)) -> SimConfig:
    """One subspace, zero coefficients: every T ~ Weibull(2, scale exp(intercept))."""
    model = SubspaceModel(nodes=[SubspaceNode(kind=NodeKind.LEAF, coef=[0.0, 0.0], intercept=intercept)])
    return SimConfig(n=n, p=2, model=model, censoring=CensoringSpec(kind=CensoringKind.NONE), seed=seed)


# ==================== Linear predictor ====================


def test_example1_linear_predictor():
    # (1 + 7)(1 - 10) < 0: second branch
    assert linear_predictor_ex1([1.0, 1.0, 1.0]) == pytest.approx(0.1)
    # (-8 + 7)(0 - 10) > 0: first branch
    assert linear_predictor_ex1([-8.0, 0.0, 0.0]) == pytest.approx(-1.6)


def test_example1_boundary_uses_second_branch():
    """A zero product is not > 0."""
    assert linear_predictor_ex1([-7.0, 2.0, 4.0]) == pytest.approx(0.3 * -7 + 0.1 * 2 - 0.3 * 4)


def test_example1_linear_predictor_needs_three_values():
    with pytest.raises(DimensionMismatchError):
        linear_predictor_ex1([1.0, 2.0])


def test_example1_model_matches_closed_form():
    X = np.random.default_rng(0).uniform(-15, 15, size=(500, 3))
    y, subspace = EXAMPLE1_MODEL.linear_predictor(X)
    assert np.allclose(y, [linear_predictor_ex1(x) for x in X], atol=1e-12)
    first = (X[:, 0] + 7) * (X[:, 2] - 10) > 0
    assert np.array_equal(subspace, np.where(first, 0, 1))


def test_example2_layout():
    config = example2_default()
    assert config.p == 5
    assert config.model.n_subspaces == 4
    assert config.model.partition_features == [0, 1, 2]
    X = np.array([[-1, -1, 5, 0, 0], [-1, 1, 5, 0, 0], [1, 5, -1, 0, 0], [1, -5, 1, 0, 0]], dtype=float)
    assert np.array_equal(config.model.assign(X), [0, 1, 2, 3])


def test_subspace_model_validation():
    leaf = SubspaceNode(kind=NodeKind.LEAF, coef=[1.0])
    with pytest.raises(ValueError):
        SubspaceModel(nodes=[SubspaceNode(kind=NodeKind.THRESHOLD, feature=0, cut=0.0, left=1, right=1), leaf])
    with pytest.raises(ValueError):
        SubspaceModel(
            nodes=[
                SubspaceNode(kind=NodeKind.THRESHOLD, feature=0, cut=0.0, left=1, right=2),
                leaf,
                SubspaceNode(kind=NodeKind.LEAF, coef=[1.0, 2.0]),
            ]
        )
    with pytest.raises(ValueError):
        SubspaceNode(kind=NodeKind.LEAF)
    with pytest.raises(ValueError):
        SimConfig(n=10, p=2, model=SubspaceModel(nodes=[leaf]))


# ==================== Event times ====================


def test_weibull_mean_within_three_standard_errors():
    result = simulate(_constant_config(20_000, seed=4))
    T = result.oracle["true_time"].to_numpy()
    expected = weibull_mean(2.0, 2.0)
    assert expected == pytest.approx(np.sqrt(np.pi))
    assert abs(T.mean() - expected) < 3 * T.std(ddof=1) / np.sqrt(T.size)
    assert result.dataset.event.all()


def test_weibull_distribution_fits():
    T = simulate(_constant_config(20_000, seed=5)).oracle["true_time"].to_numpy()
    assert kstest(T, weibull_min(c=2.0, scale=2.0).cdf).pvalue > 0.001


def test_weibull_fit_is_stable_across_seeds():
    passes = sum(
        kstest(simulate(_constant_config(2_000, seed=s)).oracle["true_time"], weibull_min(c=2.0, scale=2.0).cdf).pvalue
        > 0.01
        for s in range(20)
    )
    assert passes >= 17


# ==================== Censoring ====================


def test_tiny_uniform_bound_censors_almost_everything():
    config = example1_config(n=2000, seed=1).model_copy(
        update={"censoring": CensoringSpec(kind=CensoringKind.UNIFORM, c_max=1e-9)}
    )
    result = simulate(config)
    assert result.censoring_fraction > 0.99
    assert result.c_max == 1e-9


def test_calibrated_censoring_hits_target():
    config = example1_config(n=5000, seed=2)
    c_max = calibrate_uniform_censoring(config)
    assert c_max > 0
    result = simulate(config)
    assert result.c_max == c_max
    assert abs(result.censoring_fraction - 0.2) < 0.03


def test_calibration_honours_target_argument():
    config = example2_default(seed=3)
    assert calibrate_uniform_censoring(config, 0.5) < calibrate_uniform_censoring(config, 0.1)
    with pytest.raises(ConfigError):
        calibrate_uniform_censoring(config, 1.5)


def test_dependent_censoring_fraction():
    result = simulate(example1_dependent_config(n=5000, seed=6))
    assert result.c_max is None
    assert abs(result.censoring_fraction - 0.2) < 0.03


def test_observed_time_is_minimum_of_latent_times():
    result = simulate(example1_config(n=300, seed=8))
    oracle = result.oracle
    T, C = oracle["true_time"].to_numpy(), oracle["censor_time"].to_numpy()
    assert np.array_equal(result.dataset.time, np.minimum(T, C))
    assert np.array_equal(result.dataset.event, T <= C)
    assert list(oracle.columns) == ["id", "true_time", "censor_time", "subspace_id", "linear_predictor"]


def test_covariates_within_bounds():
    X = simulate(example2_default(n=1000, seed=9)).dataset.covariates
    assert X.min() >= -15 and X.max() < 15
    assert X.shape == (1000, 5)


# ==================== Determinism and configs ====================


def test_simulation_is_deterministic():
    config = example1_config(n=400, seed=12)
    a, b = simulate(config), simulate(config, workers=2)
    assert np.array_equal(a.dataset.time, b.dataset.time)
    assert np.array_equal(a.dataset.covariates, b.dataset.covariates)
    assert a.oracle.equals(b.oracle)
    c = simulate(config.model_copy(update={"seed": 13}))
    assert not np.array_equal(a.dataset.time, c.dataset.time)


def test_sim_config_flat_round_trip(tmp_path):
    for config in (example1_config(seed=3), example2_default(n=50), example1_dependent_config()):
        path = save_sim_config(config, tmp_path / "sim.env")
        assert load_sim_config(path) == config


def test_shipped_configs_match_presets(config_dir):
    assert load_sim_config(config_dir / "example1.env") == example1_config()
    assert load_sim_config(config_dir / "example2.env") == example2_default()
    assert load_sim_config(config_dir / "example1_dependent.env") == example1_dependent_config()


def test_dependent_censoring_config_is_explicit(config_dir):
    text = (config_dir / "example1_dependent.env").read_text(encoding="utf-8")
    assert "sim.preset" not in text
    censoring = load_sim_config(config_dir / "example1_dependent.env").censoring
    assert censoring == CensoringSpec(kind=CensoringKind.DEPENDENT, shape=2.0, intercept=0.7, slope=1.0)


def test_preset_with_overrides():
    config = sim_config_from_flat({"sim.preset": "example2", "sim.n": "25", "sim.censoring.kind": "none"})
    assert config.n == 25
    assert config.censoring.kind == CensoringKind.NONE
    assert config.model == example2_default().model


def test_invalid_sim_configs():
    with pytest.raises(ConfigError):
        sim_config_from_flat({"sim.preset": "example1", "sim.n": "0"})
    with pytest.raises(ConfigError):
        preset_config("example9")
    with pytest.raises(ConfigError):
        sim_config_from_flat({"sim.preset": "example1", "sim.p": "4"})
