"""Observables, parameter symmetries, and overlap witnesses.

The objects here formalize one question: does a hypothesis about the
parameter survive the passage to the induced distribution? An Observable maps
parameters to a summary vector, a Regime pairs an observable with a target
set, and a SymmetryAction is a distribution-preserving map on parameters.
A hypothesis whose observable separates two points that a symmetry glues
together is undecidable from data, and an OverlapWitness is the concrete
certificate: two parameter points on opposite sides of the hypothesis with
the same induced distribution.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError
from .models import (
    GmmParams,
    ModelKind,
    ModelPoint,
    RrrParams,
    batch_seed,
    fingerprint,
    log_density,
    sample,
)
from .rngutil import substream


# ---------------------------------------------------------------------------
# target sets

@dataclass(frozen=True)
class Interval:
    lower: float = -math.inf
    upper: float = math.inf
    open_lower: bool = False
    open_upper: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise InputError(f"empty interval [{self.lower}, {self.upper}]")

    def contains(self, x: float) -> bool:
        lo = self.lower < x if self.open_lower else self.lower <= x
        hi = x < self.upper if self.open_upper else x <= self.upper
        return bool(lo and hi)

    def is_disjoint_from(self, other: "Interval") -> bool:
        if self.upper < other.lower or other.upper < self.lower:
            return True
        if self.upper == other.lower:
            return self.open_upper or other.open_lower
        if other.upper == self.lower:
            return other.open_upper or self.open_lower
        return False


def interval(lower=-math.inf, upper=math.inf, open_lower=False, open_upper=False) -> Interval:
    return Interval(float(lower), float(upper), open_lower, open_upper)


def singleton(value: float) -> Interval:
    return Interval(float(value), float(value))


@dataclass(frozen=True)
class TargetBox:
    """Product of intervals in R^k."""

    intervals: Tuple[Interval, ...]

    def __post_init__(self):
        if not self.intervals:
            raise InputError("a target box needs at least one interval")
        object.__setattr__(self, "intervals", tuple(self.intervals))

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def contains(self, value) -> bool:
        v = np.atleast_1d(np.asarray(value, float))
        if v.shape != (self.dim,):
            raise InputError(f"expected a vector of length {self.dim}, got shape {v.shape}")
        return all(iv.contains(float(x)) for iv, x in zip(self.intervals, v))

    def is_disjoint_from(self, other: "TargetBox") -> bool:
        # boxes are products, so disjointness in any one axis suffices and is
        # also necessary
        if self.dim != other.dim:
            raise InputError("boxes of different dimension are not comparable")
        return any(a.is_disjoint_from(b) for a, b in zip(self.intervals, other.intervals))


# ---------------------------------------------------------------------------
# observables and symmetries

@dataclass(frozen=True)
class Observable:
    """Named map from parameter points to R^dim."""

    name: str
    fn: Callable[[ModelPoint], np.ndarray] = field(repr=False)
    dim: int = 1

    def __call__(self, point: ModelPoint) -> np.ndarray:
        out = np.atleast_1d(np.asarray(self.fn(point), float))
        if out.shape != (self.dim,):
            raise InputError(
                f"observable {self.name!r} returned shape {out.shape}, declared dim {self.dim}"
            )
        return out


@dataclass(frozen=True)
class SymmetryAction:
    """Named parameter map that must preserve the induced distribution."""

    name: str
    fn: Callable[[ModelPoint], ModelPoint] = field(repr=False)

    def __call__(self, point: ModelPoint) -> ModelPoint:
        return self.fn(point)


class RegimeLabel(str, Enum):
    NULL = "null"
    ALTERNATIVE = "alternative"


@dataclass(frozen=True)
class Regime:
    """An observable together with the target set defining one hypothesis side."""

    observable: Observable
    target: TargetBox
    label: RegimeLabel

    def __post_init__(self):
        if self.target.dim != self.observable.dim:
            raise InputError("target box dimension does not match the observable")

    def contains_point(self, point: ModelPoint) -> bool:
        return self.target.contains(self.observable(point))


@dataclass(frozen=True)
class OverlapWitness:
    """Two parameter points with the same law on opposite hypothesis sides.

    log_density_gap is the largest absolute log-density discrepancy observed
    on the probe values used to certify that the laws agree.
    """

    w0: ModelPoint
    w1: ModelPoint
    log_density_gap: float
    action_name: Optional[str] = None

    _CERTIFY_TOL = 1e-8

    def __post_init__(self):
        if not (np.isfinite(self.log_density_gap) and self.log_density_gap >= 0.0):
            raise InputError("log_density_gap must be finite and non-negative")
        # The same-law claim is what makes a witness a witness, so it is not
        # taken on trust: construction re-measures the discrepancy.
        gap = max_log_density_gap(self.w0, self.w1)
        if gap > self._CERTIFY_TOL:
            raise InputError(
                f"witness points do not share a law (log-density gap {gap:.3e})"
            )


# ---------------------------------------------------------------------------
# distribution agreement probes

def density_probe_values(point: ModelPoint, count: int = 64, seed: int = 11):
    """Observation values at which two candidate laws are compared.

    Draws from the point's own law plus, for mixtures, a deterministic sweep
    across the bulk of the support.
    """
    if count < 2:
        raise InputError("need at least two probe values")
    rng = substream("singulab.density-probes", int(seed))
    if isinstance(point, GmmParams):
        lo = min(point.mu1, point.mu2) - 8.0 * point.sigma
        hi = max(point.mu1, point.mu2) + 8.0 * point.sigma
        sweep = np.linspace(lo, hi, count // 2)
        draws = sample(point, count - sweep.size, int(rng.integers(1 << 62))).values
        return np.concatenate([sweep, draws])
    if isinstance(point, RrrParams):
        batch = sample(point, count, int(rng.integers(1 << 62)))
        return batch.x, batch.y
    raise InputError(f"not a model point: {type(point).__name__}")


def max_log_density_gap(w0: ModelPoint, w1: ModelPoint, count: int = 64, seed: int = 11) -> float:
    """Largest |log p_w0 - log p_w1| over probe values drawn around w0."""
    values = density_probe_values(w0, count, seed)
    d0 = np.atleast_1d(log_density(w0, values))
    d1 = np.atleast_1d(log_density(w1, values))
    return float(np.max(np.abs(d0 - d1)))


def check_distribution_preserving(
    action: SymmetryAction,
    points: Sequence[ModelPoint],
    tol: float = 1e-10,
    seed: int = 11,
) -> float:
    """Verify an action's contract on a set of points; returns the worst gap."""
    if not points:
        raise InputError("need at least one probe point")
    worst = 0.0
    for w in points:
        worst = max(worst, max_log_density_gap(w, action(w), seed=seed))
    if worst > tol:
        raise InputError(
            f"action {action.name!r} changes the distribution (gap {worst:.3e} > {tol:.0e})"
        )
    return worst


# ---------------------------------------------------------------------------
# built-in symmetries and observables

def _swap_labels(g: GmmParams) -> GmmParams:
    return GmmParams(g.mu2, g.mu1, g.sigma, 1.0 - g.pi1)


def fixed_sign_svd(coeff: np.ndarray):
    """Thin SVD with a deterministic sign convention.

    Each left singular vector is flipped so its largest-magnitude entry is
    positive; ties resolve toward the lower index (argmax picks the first).
    The matching row of Vt is flipped along with it.
    """
    u, s, vt = np.linalg.svd(np.asarray(coeff, float), full_matrices=False)
    u = u.copy()
    vt = vt.copy()
    for j in range(s.shape[0]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0.0:
            u[:, j] = -u[:, j]
            vt[j, :] = -vt[j, :]
    return u, s, vt


def _flip_factor_signs(r: RrrParams) -> RrrParams:
    if r.factors is not None:
        u, s, vt = r.factors
    else:
        u, s, vt = fixed_sign_svd(r.coeff)
    # keep the stored coefficient matrix bitwise: the flip renames the
    # factorization, not the law
    return RrrParams(coeff=r.coeff, sigma_eps=r.sigma_eps, factors=(-u, s, -vt))


GMM_LABEL_SWAP = SymmetryAction("gmm-label-swap", _swap_labels)
RRR_SIGN_FLIP = SymmetryAction("rrr-sign-flip", _flip_factor_signs)


def _signed_gap(w: ModelPoint) -> float:
    if not isinstance(w, GmmParams):
        raise InputError("gmm-signed-gap is defined on mixture points")
    return w.mu1 - w.mu2


def _abs_gap(w: ModelPoint) -> float:
    if not isinstance(w, GmmParams):
        raise InputError("gmm-abs-gap is defined on mixture points")
    return abs(w.mu1 - w.mu2)


def _numerical_rank(w: ModelPoint, tol: float = 1e-9) -> float:
    if not isinstance(w, RrrParams):
        raise InputError("rrr-rank is defined on regression points")
    s = np.linalg.svd(w.coeff, compute_uv=False)
    return float(np.sum(s > tol * max(1.0, float(s.max(initial=0.0)))))


def _leading_u_entry(w: ModelPoint) -> float:
    if not isinstance(w, RrrParams):
        raise InputError("rrr-leading-sign is defined on regression points")
    if w.factors is not None:
        u = w.factors[0]
    else:
        u, _, _ = fixed_sign_svd(w.coeff)
    return float(u[0, 0])


GMM_SIGNED_GAP = Observable("gmm-signed-gap", _signed_gap)
GMM_ABS_GAP = Observable("gmm-abs-gap", _abs_gap)
RRR_RANK = Observable("rrr-rank", _numerical_rank)
RRR_LEADING_U = Observable("rrr-leading-u", _leading_u_entry)


# ---------------------------------------------------------------------------
# probe grids

_GMM_PROBE_BOUNDS = ((-3.0, 3.0), (-3.0, 3.0), (0.3, 2.5), (0.05, 0.95))
_RRR_PROBE_COEFF_BOUND = 2.0
_RRR_PROBE_SIGMA = (0.3, 2.0)


def default_probe_points(
    kind: ModelKind,
    count: int = 100,
    seed: int = 7,
    rrr_shape: Tuple[int, int] = (2, 2),
):
    """Quasi-random parameter points used for identifiability sweeps."""
    from scipy.stats import qmc

    if count < 1:
        raise InputError("count must be positive")
    kind = ModelKind(kind)
    dim = 4 if kind == ModelKind.GMM else rrr_shape[0] * rrr_shape[1] + 1
    sobol = qmc.Sobol(d=dim, scramble=True, seed=int(seed))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        unit = sobol.random(2 ** math.ceil(math.log2(max(2, count))))[:count]
    points = []
    if kind == ModelKind.GMM:
        for row in unit:
            vals = [lo + (hi - lo) * t for (lo, hi), t in zip(_GMM_PROBE_BOUNDS, row)]
            points.append(GmmParams(vals[0], vals[1], vals[2], vals[3]))
        return points
    q, p = rrr_shape
    b = _RRR_PROBE_COEFF_BOUND
    for row in unit:
        coeff = (2.0 * b * row[: q * p] - b).reshape(q, p)
        sig = _RRR_PROBE_SIGMA[0] + (_RRR_PROBE_SIGMA[1] - _RRR_PROBE_SIGMA[0]) * row[-1]
        points.append(RrrParams(coeff=coeff, sigma_eps=float(sig)))
    return points


# ---------------------------------------------------------------------------
# identifiability and witnesses

@dataclass(frozen=True)
class IdentifiabilityReport:
    identifiable: bool
    point: Optional[ModelPoint] = None
    action_name: Optional[str] = None
    value: Optional[np.ndarray] = None
    mapped_value: Optional[np.ndarray] = None


def is_identifiable(
    observable: Observable,
    actions: Sequence[SymmetryAction],
    probes: Sequence[ModelPoint],
    tol: float = 1e-9,
) -> IdentifiabilityReport:
    """Does the observable factor through the induced distribution?

    Only decidable relative to the declared group: the sweep checks
    observable(w) == observable(a(w)) for every probe and action. The first
    violation is returned as a counterexample.
    """
    if not probes:
        raise InputError("need at least one probe point")
    if not actions:
        raise InputError("need at least one symmetry action")
    for w in probes:
        v = observable(w)
        for action in actions:
            mapped = observable(action(w))
            if np.max(np.abs(v - mapped)) > tol:
                return IdentifiabilityReport(False, w, action.name, v, mapped)
    return IdentifiabilityReport(True)


def find_overlap_witness(
    null: Regime,
    alt: Regime,
    actions: Sequence[SymmetryAction],
    probes: Sequence[ModelPoint],
    tol: float = 1e-10,
    seed: int = 11,
) -> Optional[OverlapWitness]:
    """Search probe points for a same-law pair straddling the two regimes.

    Returns the first witness found (probe order is deterministic), or None.
    Regimes must use the same observable and have disjoint targets.
    """
    if null.observable.name != alt.observable.name:
        raise InputError("regimes must be defined through the same observable")
    if not null.target.is_disjoint_from(alt.target):
        raise InputError("null and alternative targets must be disjoint")
    if not probes:
        raise InputError("need at least one probe point")
    for w in probes:
        candidates = [(w, None)] + [(action(w), action.name) for action in actions]
        for wa, _ in candidates:
            if not null.contains_point(wa):
                continue
            for wb, name_b in candidates:
                if wb is wa or not alt.contains_point(wb):
                    continue
                gap = max_log_density_gap(wa, wb, seed=seed)
                if gap <= tol:
                    return OverlapWitness(w0=wa, w1=wb, log_density_gap=gap, action_name=name_b)
    return None


@dataclass(frozen=True)
class ImpossibilityBound:
    """Empirical certificate that both error rates cannot be small at once.

    Replications are drawn from the witness law; each one lands on exactly
    one side of the decision, so alpha_lower + beta_lower is 1 by partition,
    and each term lower-bounds the corresponding worst-case error.
    """

    alpha_lower: float
    beta_lower: float
    total: float
    n: int
    reps: int


def verify_impossibility_bound(
    witness: OverlapWitness,
    test,
    n: int,
    reps: int = 200,
    seed: int = 0,
) -> ImpossibilityBound:
    """Run a test on witness-law data and report the induced error bounds."""
    if reps < 100:
        raise InputError(f"need at least 100 replications, got {reps}")
    if n < 1:
        raise InputError("n must be positive")
    rejections = 0
    for rep in range(reps):
        batch = sample(witness.w0, n, batch_seed(seed, n, rep, witness.w0))
        decision = test.decide(batch)
        if decision not in (0, 1):
            raise InputError(f"test returned {decision!r}, expected 0 or 1")
        rejections += decision
    alpha = rejections / reps
    beta = (reps - rejections) / reps
    return ImpossibilityBound(
        alpha_lower=alpha, beta_lower=beta, total=alpha + beta, n=int(n), reps=int(reps)
    )
