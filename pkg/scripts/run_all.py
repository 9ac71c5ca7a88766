#!/usr/bin/env python3
"""Run every registered experiment with its defaults.

Writes each experiment's four result files under runs/<name>/. The mixture
and scale-scan experiments dominate the runtime (bootstrap-calibrated EM);
expect 10 to 15 minutes total on one core. Pass --quick for a smoke pass
with small replication counts.
"""

import argparse
import sys
import time

from singulab import registry, resolve_config, run_experiment

QUICK_REPS = {"error-curve": 100, "scale-scan": 20, "contraction": 50, "hellinger": 1}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="small replication counts")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", nargs="*", default=None, help="subset of experiment names")
    args = ap.parse_args()

    names = args.only or registry.experiment_names()
    for name in names:
        kind = registry.experiment_kind(name)
        overrides = {"base_seed": args.seed}
        if args.quick:
            overrides["reps"] = QUICK_REPS[kind]
        cfg = resolve_config(name, overrides)
        t0 = time.perf_counter()
        result = run_experiment(cfg)
        dt = time.perf_counter() - t0
        print(f"{name:<14} {dt:7.1f}s  -> {result.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
