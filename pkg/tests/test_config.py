"""Experiment configuration: defaults, overrides, validation, round-trips."""

import json

import numpy as np
import pytest

from singulab.config import (
    ExperimentConfig,
    load_config,
    point_from_json,
    point_to_json,
    resolve_config,
)
from singulab.errors import ConfigError
from singulab.models import GmmParams, RrrParams
from singulab.registry import EXPERIMENT_DEFAULTS


def test_every_registered_experiment_resolves():
    for name in EXPERIMENT_DEFAULTS:
        cfg = resolve_config(name)
        assert cfg.name == name
        assert cfg.reps >= 1
        assert all(b > a for a, b in zip(cfg.sample_sizes, cfg.sample_sizes[1:]))


def test_scalar_overrides_replace_values():
    cfg = resolve_config("gmm-ordering", {"reps": 120, "base_seed": 9})
    assert cfg.reps == 120
    assert cfg.base_seed == 9
    # untouched fields keep their defaults
    assert cfg.sample_sizes == resolve_config("gmm-ordering").sample_sizes


def test_nested_overrides_merge_key_by_key():
    base = resolve_config("scale-scan")
    cfg = resolve_config("scale-scan", {"params": {"sigma": 2.0}})
    assert cfg.params["sigma"] == 2.0
    kept = {k: v for k, v in cfg.params.items() if k != "sigma"}
    assert kept == {k: v for k, v in base.params.items() if k != "sigma"}


def test_unknown_override_key_rejected():
    with pytest.raises(ConfigError):
        resolve_config("gmm-ordering", {"repz": 100})


def test_mismatched_name_rejected():
    with pytest.raises(ConfigError):
        resolve_config("gmm-ordering", {"name": "rrr-sign"})


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError):
        resolve_config("gmm-everything")


def test_invalid_sample_sizes_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig(
            name="x", kind="error-curve", sample_sizes=(100, 100), reps=10
        )
    with pytest.raises(ConfigError):
        ExperimentConfig(name="x", kind="error-curve", sample_sizes=(0,), reps=10)
    with pytest.raises(ConfigError):
        ExperimentConfig(name="x", kind="error-curve", sample_sizes=(100,), reps=0)


def test_config_json_round_trip():
    cfg = resolve_config("gmm-mixture", {"reps": 111})
    blob = cfg.to_json()
    back = json.loads(blob)
    assert back["name"] == "gmm-mixture"
    assert back["reps"] == 111


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"name": "rrr-sign", "reps": 150}))
    cfg = load_config("rrr-sign", path)
    assert cfg.reps == 150


def test_gmm_point_round_trips_through_json():
    p = GmmParams(-1.25, 0.5, 0.75, 0.3)
    assert point_from_json(point_to_json(p)) == p


def test_rrr_point_round_trips_through_json():
    p = RrrParams(np.array([[0.5, -1.0], [2.0, 0.25]]), 1.5)
    q = point_from_json(point_to_json(p))
    assert np.array_equal(q.coeff, p.coeff)
    assert q.sigma_eps == p.sigma_eps


def test_rrr_factors_survive_round_trip():
    u, s, vt = np.linalg.svd(np.array([[1.0, 0.3], [0.2, 0.8]]))
    p = RrrParams.from_factors(u, s, vt, 1.0)
    q = point_from_json(point_to_json(p))
    assert q.factors is not None
    assert np.allclose(q.factors[0], u)


def test_named_point_resolves_from_registry():
    p = point_from_json("std-normal")
    assert p == GmmParams(0.0, 0.0, 1.0, 0.5)


def test_unknown_point_name_rejected():
    with pytest.raises(ConfigError):
        point_from_json("std-abnormal")
