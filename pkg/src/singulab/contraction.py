"""Grid-prior posteriors and contraction-rate experiments.

Everything here works over a finite grid of model points carrying prior
weights. Posteriors are computed in log space with the log-sum-exp shift, so
sample sizes in the thousands pose no underflow problem. The two experiment
entry points measure, as a function of n, the expected posterior mass:

* ``contraction_experiment`` on the part of the grid at Hellinger distance at
  least eps_n from the null set (mass that should vanish when the truth sits
  in the null regime), and
* ``nonseparation_demo`` on the full alternative region including points
  arbitrarily close to the null (mass that persists, which is the point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .divergence import hellinger2
from .equivalence import Regime
from .errors import InputError, NumericalError
from .models import (
    GmmParams,
    ModelKind,
    ModelPoint,
    SampleBatch,
    batch_seed,
    fingerprint,
    log_density,
    sample,
)

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GridPrior:
    """Finite support prior: distinct model points with weights summing to 1.

    Weights may be zero (at least one must be positive); normalization must
    hold to 1e-12 on input.
    """

    points: Tuple[ModelPoint, ...]
    weights: np.ndarray

    def __post_init__(self):
        points = tuple(self.points)
        w = np.array(self.weights, dtype=float)
        if len(points) == 0 or w.shape != (len(points),):
            raise InputError("points and weights must be nonempty and aligned")
        if (w < 0.0).any() or not np.isfinite(w).all():
            raise InputError("weights must be finite and nonnegative")
        if w.max() <= 0.0:
            raise InputError("at least one weight must be positive")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise InputError(f"weights sum to {w.sum()!r}, expected 1 within 1e-12")
        seen = set()
        for p in points:
            fp = fingerprint(p)
            if fp in seen:
                raise InputError("grid points must induce distinct distributions")
            seen.add(fp)
        w.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points: Sequence[ModelPoint]) -> "GridPrior":
        k = len(points)
        return cls(points=tuple(points), weights=np.full(k, 1.0 / k))

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class EpsilonSchedule:
    """Separation radius as a function of n.

    kind "fixed" keeps eps_n = value; kind "root4" uses value * n^(-1/4),
    the slowest schedule under which contraction is still expected to bite.
    """

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("fixed", "root4"):
            raise InputError(f"unknown schedule kind {self.kind!r}")
        if not self.value > 0.0:
            raise InputError("schedule value must be positive")

    def at(self, n: int) -> float:
        if self.kind == "fixed":
            return self.value
        return self.value * float(n) ** -0.25


@dataclass(frozen=True)
class ContractionTrace:
    sample_sizes: Tuple[int, ...]
    posterior_mass_alt: Tuple[float, ...]
    mass_se: Tuple[float, ...]
    epsilons: Tuple[float, ...]
    truth: ModelPoint
    reps: int
    mode: str  # "separated" | "full-alternative"


def _grid_log_likelihood(points: Sequence[ModelPoint], batch: SampleBatch) -> np.ndarray:
    """Total log-likelihood of the batch under each grid point."""
    if batch.kind == ModelKind.GMM and all(isinstance(p, GmmParams) for p in points):
        x = batch.values[None, :]
        mu1 = np.array([p.mu1 for p in points])[:, None]
        mu2 = np.array([p.mu2 for p in points])[:, None]
        sig = np.array([p.sigma for p in points])[:, None]
        pi1 = np.array([p.pi1 for p in points])[:, None]
        with np.errstate(divide="ignore"):
            lw1 = np.log(pi1)
            lw2 = np.log(1.0 - pi1)
        a = lw1 - np.log(sig) - 0.5 * LOG_2PI - 0.5 * ((x - mu1) / sig) ** 2
        b = lw2 - np.log(sig) - 0.5 * LOG_2PI - 0.5 * ((x - mu2) / sig) ** 2
        return np.logaddexp(a, b).sum(axis=1)
    return np.array([np.sum(log_density(p, batch.data)) for p in points])


def posterior_over_grid(prior: GridPrior, batch: SampleBatch) -> np.ndarray:
    """Posterior weights given one batch; an empty batch returns the prior."""
    if batch.n == 0:
        return prior.weights.copy()
    loglik = _grid_log_likelihood(prior.points, batch)
    with np.errstate(divide="ignore"):
        log_post = np.where(prior.weights > 0.0, np.log(prior.weights) + loglik, -np.inf)
    top = float(np.max(log_post))
    if not math.isfinite(top):
        raise NumericalError(
            f"posterior underflow: largest unnormalized log weight is {top}"
        )
    w = np.exp(log_post - top)
    return w / w.sum()


def hellinger_to_null_set(
    prior: GridPrior, null_regime: Regime, nodes: int = 4001, n_draws: int = 100_000,
) -> np.ndarray:
    """Distance from each grid point to the nearest null-regime grid point."""
    null_points = [p for p in prior.points if null_regime.contains_point(p)]
    if not null_points:
        raise InputError("the null regime contains no grid point")
    cache: Dict[Tuple[bytes, bytes], float] = {}
    dist = np.zeros(len(prior))
    for i, p in enumerate(prior.points):
        best = math.inf
        for np_ in null_points:
            key = tuple(sorted((fingerprint(p), fingerprint(np_))))
            if key not in cache:
                cache[key] = hellinger2(p, np_, nodes=nodes, n_draws=n_draws).h
            best = min(best, cache[key])
        dist[i] = best
    return dist


def prior_mass_within(prior: GridPrior, center: ModelPoint, eps: float) -> float:
    """Prior mass of the Hellinger ball around a point, by direct summation."""
    mass = 0.0
    for p, w in zip(prior.points, prior.weights):
        if hellinger2(p, center).h <= eps:
            mass += float(w)
    return mass


def _mass_trace(prior, truth, member_mass, sample_sizes, reps, base_seed):
    sizes = [int(n) for n in sample_sizes]
    if not sizes or any(n < 1 for n in sizes) or any(
        b <= a for a, b in zip(sizes, sizes[1:])
    ):
        raise InputError("sample_sizes must be strictly increasing and positive")
    if reps < 1:
        raise InputError("reps must be positive")
    means, ses = [], []
    for n in sizes:
        masses = np.empty(reps)
        for rep in range(reps):
            batch = sample(truth, n, batch_seed(base_seed, n, rep, truth))
            w = posterior_over_grid(prior, batch)
            masses[rep] = float(w @ member_mass)
        means.append(float(masses.mean()))
        ses.append(float(masses.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0)
    return sizes, means, ses


def contraction_experiment(
    prior: GridPrior,
    truth: ModelPoint,
    null_regime: Regime,
    schedule: EpsilonSchedule,
    sample_sizes: Sequence[int],
    reps: int = 200,
    base_seed: int = 0,
    nodes: int = 4001,
) -> ContractionTrace:
    """Expected posterior mass on the eps_n-separated part of the grid.

    Pairwise Hellinger distances to the null set are computed once and reused
    across all sample sizes and replications.
    """
    dist = hellinger_to_null_set(prior, null_regime, nodes=nodes)
    sizes = [int(n) for n in sample_sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError("sample_sizes must be strictly increasing")
    means, ses, epss = [], [], []
    for n in sizes:
        eps = schedule.at(n)
        member = (dist >= eps).astype(float)
        _, mu, se = _mass_trace(prior, truth, member, [n], reps, base_seed)
        means.append(mu[0])
        ses.append(se[0])
        epss.append(eps)
    return ContractionTrace(
        sample_sizes=tuple(sizes),
        posterior_mass_alt=tuple(means),
        mass_se=tuple(ses),
        epsilons=tuple(epss),
        truth=truth,
        reps=int(reps),
        mode="separated",
    )


def nonseparation_demo(
    prior: GridPrior,
    truth: ModelPoint,
    alt_regime: Regime,
    sample_sizes: Sequence[int],
    reps: int = 200,
    base_seed: int = 0,
) -> ContractionTrace:
    """Expected posterior mass on the whole alternative region of the grid.

    No separation radius is imposed: alternative points arbitrarily close to
    the null keep their mass, however large n grows, and that persistence is
    what this demo exhibits next to ``contraction_experiment``.
    """
    member = np.array(
        [1.0 if alt_regime.contains_point(p) else 0.0 for p in prior.points]
    )
    if member.sum() == 0:
        raise InputError("the alternative regime contains no grid point")
    sizes, means, ses = _mass_trace(prior, truth, member, sample_sizes, reps, base_seed)
    return ContractionTrace(
        sample_sizes=tuple(sizes),
        posterior_mass_alt=tuple(means),
        mass_se=tuple(ses),
        epsilons=tuple(0.0 for _ in sizes),
        truth=truth,
        reps=int(reps),
        mode="full-alternative",
    )
