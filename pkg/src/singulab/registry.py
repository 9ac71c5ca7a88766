"""Registry of named observables, symmetries, tests, points, and experiments.

Everything that the command line can address by string lives here, together
with the default definition of each built-in experiment. Defaults are plain
data; the harness turns them into configs and runs them.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import equivalence as eq
from . import testing
from .errors import InputError
from .models import GmmParams, ModelKind, ModelPoint, RrrParams

# ---------------------------------------------------------------------------
# named building blocks

OBSERVABLES: Dict[str, eq.Observable] = {
    o.name: o
    for o in (eq.GMM_SIGNED_GAP, eq.GMM_ABS_GAP, eq.RRR_RANK, eq.RRR_LEADING_U)
}

ACTIONS: Dict[str, eq.SymmetryAction] = {
    a.name: a for a in (eq.GMM_LABEL_SWAP, eq.RRR_SIGN_FLIP)
}


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _rrr_sign_point() -> RrrParams:
    u = _rotation(0.4)
    vt = _rotation(-0.2)
    return RrrParams.from_factors(u, np.array([1.5, 0.7]), vt, sigma_eps=1.0)


# orthonormal pair in R^3 with exact rational entries
_RANK_VT = np.array([[2.0, 1.0, 2.0], [-2.0, 2.0, 1.0]]) / 3.0
_RANK_SVALS = np.array([1.6, 0.8])


def _rrr_rank_alt() -> RrrParams:
    return RrrParams.from_factors(_rotation(0.3), _RANK_SVALS, _RANK_VT, sigma_eps=1.0)


def _rrr_rank_null() -> RrrParams:
    u = _rotation(0.3)[:, :1]
    return RrrParams.from_factors(u, _RANK_SVALS[:1], _RANK_VT[:1], sigma_eps=1.0)


POINTS: Dict[str, ModelPoint] = {
    "std-normal": GmmParams(0.0, 0.0, 1.0, 0.5),
    "gap1-mixture": GmmParams(-0.5, 0.5, 1.0, 0.5),
    "gap2-mixture": GmmParams(-1.0, 1.0, 1.0, 0.5),
    "gap3-mixture": GmmParams(-1.5, 1.5, 1.0, 0.5),
    "gap4-mixture": GmmParams(-2.0, 2.0, 1.0, 0.5),
    "ordered-pair": GmmParams(2.0, -2.0, 1.0, 0.5),
    "swapped-pair": GmmParams(-2.0, 2.0, 1.0, 0.5),
    "rrr-zero-1x1": RrrParams(np.zeros((1, 1)), 1.0),
    "rrr-unit-1x1": RrrParams(np.ones((1, 1)), 1.0),
    "rrr-sign-ref": _rrr_sign_point(),
    "rrr-rank2-ref": _rrr_rank_alt(),
    "rrr-rank1-ref": _rrr_rank_null(),
}


# ---------------------------------------------------------------------------
# hypothesis definitions (regime pair + symmetry group + probes)

def _regime(observable: str, target: eq.TargetBox, label: eq.RegimeLabel) -> eq.Regime:
    return eq.Regime(observable=OBSERVABLES[observable], target=target, label=label)


def hypothesis_for(experiment: str):
    """(null regime, alt regime, actions) for experiments that have one."""
    if experiment == "gmm-ordering":
        null = _regime(
            "gmm-signed-gap",
            eq.TargetBox((eq.interval(0.0, math.inf, open_lower=True),)),
            eq.RegimeLabel.NULL,
        )
        alt = _regime(
            "gmm-signed-gap",
            eq.TargetBox((eq.interval(-math.inf, 0.0, open_upper=True),)),
            eq.RegimeLabel.ALTERNATIVE,
        )
        return null, alt, [ACTIONS["gmm-label-swap"]]
    if experiment == "gmm-mixture":
        null = _regime("gmm-abs-gap", eq.TargetBox((eq.singleton(0.0),)), eq.RegimeLabel.NULL)
        alt = _regime(
            "gmm-abs-gap", eq.TargetBox((eq.interval(1.0, math.inf),)), eq.RegimeLabel.ALTERNATIVE
        )
        return null, alt, [ACTIONS["gmm-label-swap"]]
    if experiment == "rrr-rank":
        null = _regime("rrr-rank", eq.TargetBox((eq.singleton(1.0),)), eq.RegimeLabel.NULL)
        alt = _regime(
            "rrr-rank", eq.TargetBox((eq.interval(2.0, math.inf),)), eq.RegimeLabel.ALTERNATIVE
        )
        return null, alt, [ACTIONS["rrr-sign-flip"]]
    if experiment == "rrr-sign":
        null = _regime(
            "rrr-leading-u",
            eq.TargetBox((eq.interval(0.0, math.inf, open_lower=True),)),
            eq.RegimeLabel.NULL,
        )
        alt = _regime(
            "rrr-leading-u",
            eq.TargetBox((eq.interval(-math.inf, 0.0, open_upper=True),)),
            eq.RegimeLabel.ALTERNATIVE,
        )
        return null, alt, [ACTIONS["rrr-sign-flip"]]
    return None


def witness_probes(experiment: str, count: int = 24, seed: int = 7) -> List[ModelPoint]:
    """Probe points for the witness search: the default grids first, then a
    quasi-random sweep."""
    defaults = EXPERIMENT_DEFAULTS.get(experiment)
    probes: List[ModelPoint] = []
    if defaults and "grids" in defaults:
        for grid in defaults["grids"].values():
            probes.extend(grid)
    if experiment.startswith("gmm"):
        probes.extend(eq.default_probe_points(ModelKind.GMM, count, seed))
    else:
        probes.extend(eq.default_probe_points(ModelKind.RRR, count, seed))
    return probes


# ---------------------------------------------------------------------------
# experiment defaults

_ERROR_CURVE_NS = (100, 300, 1000, 3000, 10000)

EXPERIMENT_DEFAULTS: Dict[str, dict] = {
    "gmm-ordering": {
        "kind": "error-curve",
        "sample_sizes": _ERROR_CURVE_NS,
        "reps": 500,
        "grids": {
            "null": (POINTS["ordered-pair"],),
            "alt": (POINTS["swapped-pair"],),
        },
        "calibration": {},
        "params": {},
    },
    "gmm-mixture": {
        "kind": "error-curve",
        "sample_sizes": _ERROR_CURVE_NS,
        "reps": 300,
        "grids": {
            "null": (POINTS["std-normal"],),
            "alt": (POINTS["gap3-mixture"],),
        },
        "calibration": {},
        "params": {},
    },
    "rrr-rank": {
        "kind": "error-curve",
        "sample_sizes": (100, 300, 500, 1000, 2000),
        "reps": 300,
        "grids": {
            "null": (POINTS["rrr-rank1-ref"],),
            "alt": (POINTS["rrr-rank2-ref"],),
        },
        "calibration": {},
        "params": {"r0": 1},
    },
    "rrr-sign": {
        "kind": "error-curve",
        "sample_sizes": _ERROR_CURVE_NS,
        "reps": 500,
        "grids": {
            "null": (POINTS["rrr-sign-ref"],),
            "alt": (ACTIONS["rrr-sign-flip"](POINTS["rrr-sign-ref"]),),
        },
        "calibration": {},
        "params": {},
    },
    "scale-scan": {
        "kind": "scale-scan",
        "sample_sizes": (100, 300, 1000, 3000),
        "reps": 150,
        "grids": {},
        "calibration": {"bootstrap": 99},
        "params": {
            "deltas": (0.0, 0.15, 0.3, 0.6, 1.2, 2.4),
            "exponent_deltas": tuple(np.geomspace(0.05, 0.5, 6)),
            "sigma": 1.0,
        },
    },
    "contraction": {
        "kind": "contraction",
        "sample_sizes": (100, 200, 500, 1000, 2000),
        "reps": 300,
        "grids": {},
        "calibration": {},
        "params": {
            "gap_max": 3.0,
            "gap_count": 31,
            "epsilon_kind": "fixed",
            "epsilon_value": 0.2,
            "truth_gap": 0.0,
        },
    },
    "hellinger": {
        "kind": "hellinger",
        "sample_sizes": (),
        "reps": 1,
        "grids": {
            "null": (POINTS["std-normal"],),
            "alt": (POINTS["gap2-mixture"], POINTS["gap4-mixture"]),
        },
        "calibration": {},
        "params": {"method": "auto", "nodes": 4001, "n_draws": 100_000},
    },
}


def experiment_names() -> List[str]:
    return sorted(EXPERIMENT_DEFAULTS)


def experiment_kind(name: str) -> str:
    if name not in EXPERIMENT_DEFAULTS:
        raise InputError(f"unknown experiment {name!r}; known: {', '.join(experiment_names())}")
    return EXPERIMENT_DEFAULTS[name]["kind"]


# ---------------------------------------------------------------------------
# tests by name

def make_test(experiment: str, calibration: dict) -> testing.TestProcedure:
    """Build the test procedure an experiment uses, from a calibration dict."""
    cal = dict(calibration or {})

    def _em_settings(default: testing.em.EmSettings) -> testing.em.EmSettings:
        return testing.em.EmSettings(
            restarts=int(cal.pop("em_restarts", default.restarts)),
            max_iter=int(cal.pop("em_max_iter", default.max_iter)),
            tol=float(cal.pop("em_tol", default.tol)),
            bins=int(cal.pop("em_bins", default.bins)),
            init=str(cal.pop("em_init", default.init)),
        )

    if experiment == "gmm-ordering":
        base = testing.OrderingCalibration()
        proc = testing.make_gmm_ordering_test(
            testing.OrderingCalibration(em=_em_settings(base.em))
        )
    elif experiment == "gmm-mixture" or experiment == "scale-scan":
        base = testing.MixtureCalibration()
        proc = testing.make_gmm_mixture_test(
            testing.MixtureCalibration(
                level=float(cal.pop("level", base.level)),
                bootstrap=int(cal.pop("bootstrap", base.bootstrap)),
                em=_em_settings(base.em),
            )
        )
    elif experiment == "rrr-rank":
        base = testing.RankCalibration()
        r0 = int(cal.pop("r0", 1))
        proc = testing.make_rrr_rank_test(
            r0,
            testing.RankCalibration(
                level=float(cal.pop("level", base.level)),
                bootstrap=int(cal.pop("bootstrap", base.bootstrap)),
            ),
        )
    elif experiment == "rrr-sign":
        proc = testing.make_rrr_sign_test(
            testing.SignCalibration(tie_tol=float(cal.pop("tie_tol", 1e-12)))
        )
    else:
        raise InputError(f"experiment {experiment!r} does not define a test")
    if cal:
        raise InputError(f"unused calibration keys for {experiment}: {sorted(cal)}")
    return proc
