"""Command line entry point.

Subcommands: run, hellinger, witness, list, version. Exit code 0 on success,
2 for usage and configuration problems, 3 when too many replications fail
mid-experiment.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import divergence as dv
from . import equivalence as eq
from . import registry
from ._version import __version__
from .config import load_config, point_to_json, resolve_config
from .errors import ConfigError, ReplicationFailureError, SingulabError
from .harness import run_experiment
from .models import GmmParams, ModelPoint, RrrParams

import numpy as np


def _parse_point(text: str) -> ModelPoint:
    """A named registry point, or an inline spec.

    Inline forms: ``gmm:mu1,mu2,sigma[,pi1]`` and ``rrr:c[,sigma_eps]`` for
    the scalar-coefficient model.
    """
    if ":" not in text:
        if text in registry.POINTS:
            return registry.POINTS[text]
        raise ConfigError(
            f"unknown point {text!r}; named points: {', '.join(sorted(registry.POINTS))}"
        )
    tag, _, rest = text.partition(":")
    try:
        vals = [float(v) for v in rest.split(",") if v != ""]
    except ValueError as exc:
        raise ConfigError(f"bad point spec {text!r}: {exc}") from exc
    if tag == "gmm":
        if len(vals) == 3:
            return GmmParams(vals[0], vals[1], vals[2])
        if len(vals) == 4:
            return GmmParams(vals[0], vals[1], vals[2], vals[3])
        raise ConfigError("gmm point needs mu1,mu2,sigma[,pi1]")
    if tag == "rrr":
        if len(vals) == 1:
            return RrrParams(np.array([[vals[0]]]), 1.0)
        if len(vals) == 2:
            return RrrParams(np.array([[vals[0]]]), vals[1])
        raise ConfigError("rrr point needs c[,sigma_eps]")
    raise ConfigError(f"point spec must start with 'gmm:' or 'rrr:', got {text!r}")


def _cmd_run(args) -> int:
    target = args.target
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.reps is not None:
        overrides["reps"] = args.reps

    path = Path(target)
    if target.endswith(".json") or path.is_file():
        if not path.is_file():
            print(f"config file not found: {path}", file=sys.stderr)
            return 2
        raw = json.loads(path.read_text())
        if not isinstance(raw, dict) or "name" not in raw:
            print(f"config file {path} must be an object with a 'name' key", file=sys.stderr)
            return 2
        name = raw["name"]
        cfg = load_config(name, path, overrides)
    else:
        cfg = resolve_config(target, overrides)

    result = run_experiment(cfg, args.out)
    print(f"{cfg.name}: wrote {result.out_dir}/results.csv (+json, svg, manifest)")
    return 0


def _cmd_hellinger(args) -> int:
    a = _parse_point(args.point_a)
    b = _parse_point(args.point_b)
    est = dv.hellinger2(a, b, method=args.method)
    print(f"point A: {json.dumps(point_to_json(a))}")
    print(f"point B: {json.dumps(point_to_json(b))}")
    print(f"h^2 = {est.h2:.12g}   h = {est.h:.12g}")
    print(f"method = {est.method}   error radius = {est.error_radius:.3g}   "
          f"evaluations = {est.n_eval}")
    return 0


def _cmd_witness(args) -> int:
    name = args.experiment
    hyp = registry.hypothesis_for(name)
    if hyp is None:
        print(f"experiment {name!r} has no hypothesis pair to witness", file=sys.stderr)
        return 2
    null_regime, alt_regime, actions = hyp
    witness = eq.find_overlap_witness(
        null_regime, alt_regime, actions, registry.witness_probes(name)
    )
    if witness is None:
        print(f"{name}: no overlap witness found; the probed hypothesis "
              "looks testable (regimes stay separated under the symmetry group)")
        return 0
    print(f"{name}: overlap witness (same law, opposite hypothesis sides)")
    print(f"  w0 (null side): {json.dumps(point_to_json(witness.w0))}")
    print(f"  w1 (alt side):  {json.dumps(point_to_json(witness.w1))}")
    print(f"  via action:     {witness.action_name}")
    print(f"  max log-density discrepancy over probe points: {witness.log_density_gap:.3g}")
    return 0


def _cmd_list(args) -> int:
    print("experiments:")
    for name in registry.experiment_names():
        print(f"  {name}  ({registry.EXPERIMENT_DEFAULTS[name]['kind']})")
    print("named points:")
    for name in sorted(registry.POINTS):
        print(f"  {name}")
    print("observables:")
    for name in sorted(registry.OBSERVABLES):
        print(f"  {name}")
    print("symmetry actions:")
    for name in sorted(registry.ACTIONS):
        print(f"  {name}")
    return 0


def _cmd_version(args) -> int:
    print(f"singulab {__version__}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singulab",
        description="Numerical experiments on testability in singular statistical models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file or by name")
    p_run.add_argument("target", help="path to a JSON config, or an experiment name")
    p_run.add_argument("--seed", type=int, default=None, help="override base seed")
    p_run.add_argument("--reps", type=int, default=None, help="override replication count")
    p_run.add_argument("--out", default=None, help="override output directory")
    p_run.set_defaults(func=_cmd_run)

    p_h = sub.add_parser("hellinger", help="distance between two model points")
    p_h.add_argument("point_a", help="named point or inline spec (gmm:mu1,mu2,sigma[,pi1])")
    p_h.add_argument("point_b")
    p_h.add_argument("--method", default="auto", choices=["auto", "quadrature", "monte-carlo"])
    p_h.set_defaults(func=_cmd_hellinger)

    p_w = sub.add_parser("witness", help="search for an overlap witness pair")
    p_w.add_argument("experiment", help="experiment name, e.g. gmm-ordering")
    p_w.set_defaults(func=_cmd_witness)

    p_l = sub.add_parser("list", help="show registry contents")
    p_l.set_defaults(func=_cmd_list)

    p_v = sub.add_parser("version", help="print the library version")
    p_v.set_defaults(func=_cmd_version)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ReplicationFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SingulabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
