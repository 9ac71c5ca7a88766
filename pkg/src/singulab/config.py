"""Experiment configuration: a dataclass with a JSON round trip.

A config file is a single JSON object. ``singulab run NAME`` starts from the
registry defaults for NAME and applies whatever the file (and the command
line) overrides. Model points are serialized as tagged objects so GMM and
reduced-rank points can share one grid format; see docs/config_schema.json
for the exact shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError
from .models import GmmParams, ModelPoint, RrrParams
from .registry import EXPERIMENT_DEFAULTS, POINTS, experiment_names


def point_to_json(point: ModelPoint) -> dict:
    if isinstance(point, GmmParams):
        return {
            "model": "gmm",
            "mu1": point.mu1,
            "mu2": point.mu2,
            "sigma": point.sigma,
            "pi1": point.pi1,
        }
    out: dict = {
        "model": "rrr",
        "coeff": point.coeff.tolist(),
        "sigma_eps": point.sigma_eps,
    }
    if point.factors is not None:
        u, s, vt = point.factors
        out["factors"] = {"u": u.tolist(), "s": s.tolist(), "vt": vt.tolist()}
    return out


def point_from_json(obj: Union[dict, str]) -> ModelPoint:
    """Decode a point. A bare string is looked up among the named points."""
    if isinstance(obj, str):
        if obj not in POINTS:
            raise ConfigError(f"unknown named point {obj!r}")
        return POINTS[obj]
    if not isinstance(obj, dict):
        raise ConfigError(f"point must be an object or a name, got {type(obj).__name__}")
    model = obj.get("model")
    try:
        if model == "gmm":
            return GmmParams(
                float(obj["mu1"]), float(obj["mu2"]), float(obj["sigma"]),
                float(obj.get("pi1", 0.5)),
            )
        if model == "rrr":
            if "factors" in obj and obj["factors"] is not None:
                f = obj["factors"]
                return RrrParams.from_factors(
                    np.asarray(f["u"], dtype=float),
                    np.asarray(f["s"], dtype=float),
                    np.asarray(f["vt"], dtype=float),
                    float(obj.get("sigma_eps", 1.0)),
                )
            return RrrParams(
                np.asarray(obj["coeff"], dtype=float), float(obj.get("sigma_eps", 1.0))
            )
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"point is missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad point: {exc}") from exc
    raise ConfigError(f"point 'model' must be 'gmm' or 'rrr', got {model!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment run needs, resolved and validated."""

    name: str
    kind: str
    sample_sizes: Tuple[int, ...]
    reps: int
    base_seed: int = 0
    grids: Dict[str, Tuple[ModelPoint, ...]] = field(default_factory=dict)
    calibration: Dict[str, float] = field(default_factory=dict)
    params: Dict[str, object] = field(default_factory=dict)
    output_dir: Optional[str] = None

    def __post_init__(self):
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        ns = [int(n) for n in self.sample_sizes]
        if any(n < 1 for n in ns):
            raise ConfigError("sample sizes must be positive")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("sample sizes must be strictly increasing")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "sample_sizes": list(self.sample_sizes),
            "reps": self.reps,
            "base_seed": self.base_seed,
            "grids": {
                side: [point_to_json(p) for p in pts] for side, pts in self.grids.items()
            },
            "calibration": dict(self.calibration),
            "params": _jsonable(self.params),
            "output_dir": self.output_dir,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


_KNOWN_KEYS = {
    "name", "kind", "sample_sizes", "reps", "base_seed", "grids", "calibration",
    "params", "output_dir",
}


def resolve_config(name: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Registry defaults for ``name``, with ``overrides`` merged on top.

    Scalar fields replace; ``grids``, ``calibration`` and ``params`` merge
    key by key so a file can override one grid side without restating the
    other.
    """
    if name not in EXPERIMENT_DEFAULTS:
        raise ConfigError(
            f"unknown experiment {name!r}; known: {', '.join(experiment_names())}"
        )
    d = EXPERIMENT_DEFAULTS[name]
    merged = {
        "sample_sizes": tuple(d["sample_sizes"]),
        "reps": d["reps"],
        "base_seed": 0,
        "grids": {side: tuple(pts) for side, pts in d["grids"].items()},
        "calibration": dict(d["calibration"]),
        "params": dict(d["params"]),
    }
    overrides = dict(overrides or {})
    if "name" in overrides and overrides.pop("name") != name:
        raise ConfigError("config 'name' does not match the experiment being run")
    overrides.pop("kind", None)
    unknown = set(overrides) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "sample_sizes" in overrides:
        merged["sample_sizes"] = tuple(int(n) for n in overrides["sample_sizes"])
    if "reps" in overrides:
        merged["reps"] = int(overrides["reps"])
    if "base_seed" in overrides:
        merged["base_seed"] = int(overrides["base_seed"])
    if "grids" in overrides:
        if not isinstance(overrides["grids"], dict):
            raise ConfigError("'grids' must be an object mapping side -> point list")
        for side, pts in overrides["grids"].items():
            merged["grids"][side] = tuple(point_from_json(p) for p in pts)
    if "calibration" in overrides:
        merged["calibration"].update(overrides["calibration"])
    if "params" in overrides:
        merged["params"].update(overrides["params"])
    if "output_dir" in overrides and overrides["output_dir"] is not None:
        merged["output_dir"] = str(overrides["output_dir"])
    return ExperimentConfig(name=name, kind=d["kind"], **merged)


def load_config(name: str, path: Optional[Union[str, Path]] = None,
                extra: Optional[dict] = None) -> ExperimentConfig:
    """Resolve ``name`` against an optional JSON file plus ad-hoc overrides."""
    overrides: dict = {}
    if path is not None:
        text = Path(path).read_text()
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must contain a JSON object")
        overrides.update(loaded)
    if extra:
        overrides.update(extra)
    return resolve_config(name, overrides)
