"""Model families: two-component Gaussian mixtures and reduced-rank regression.

Both families are deliberately small. What matters for the rest of the package
is that distinct parameter points can induce exactly the same distribution, so
sampling and densities are written to respect that: two equivalent points fed
the same seed produce bit-identical samples.

For the mixture family the sampler works on a canonical component ordering
(components sorted by mean, weights snapped to a 2^-44 grid so that the
float expression ``1 - (1 - w)`` cannot split one distribution into two
fingerprints). For reduced-rank regression the law depends on the coefficient
matrix only; an optional SVD factor triple records which representative of the
equivalence class a point denotes without entering the likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from .errors import InputError, ParameterError
from .rngutil import stream_seed, substream

LOG_2PI = math.log(2.0 * math.pi)

_WEIGHT_QUANTUM = 2.0 ** -44


class ModelKind(str, Enum):
    GMM = "gmm"
    RRR = "rrr"


def _snap_weight(w: float) -> float:
    """Round a mixture weight onto the canonical 2^-44 grid, clipped to [0, 1]."""
    return min(1.0, max(0.0, round(w / _WEIGHT_QUANTUM) * _WEIGHT_QUANTUM))


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class GmmParams:
    """Two-component Gaussian mixture with a shared scale.

    pi1 is the weight of the component at mu1. The parameterization is
    redundant on purpose: (mu1, mu2, sigma, pi1) and (mu2, mu1, sigma, 1-pi1)
    induce the same distribution.
    """

    mu1: float
    mu2: float
    sigma: float
    pi1: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "mu1", _require_finite("mu1", self.mu1))
        object.__setattr__(self, "mu2", _require_finite("mu2", self.mu2))
        object.__setattr__(self, "sigma", _require_finite("sigma", self.sigma))
        object.__setattr__(self, "pi1", _require_finite("pi1", self.pi1))
        if self.sigma <= 0.0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not 0.0 <= self.pi1 <= 1.0:
            raise ParameterError(f"pi1 must lie in [0, 1], got {self.pi1}")

    @property
    def kind(self) -> ModelKind:
        return ModelKind.GMM

    def canonical_components(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        """Components as ((mu_lo, w_lo), (mu_hi, w_hi)), sorted by (mean, weight).

        Weights are snapped to the canonical grid; equivalent points map to
        the same tuple, which is what sampling and fingerprints key on.
        """
        a = (self.mu1, _snap_weight(self.pi1))
        b = (self.mu2, _snap_weight(1.0 - self.pi1))
        return (a, b) if a <= b else (b, a)


@dataclass(frozen=True, eq=False)
class RrrParams:
    """Linear regression y = C x + eps with isotropic Gaussian noise.

    The predictor law is fixed at N(0, I_p); C has shape (q, p). ``factors``
    optionally stores an SVD triple (U, s, Vt) naming a factorization of C.
    The induced distribution never looks at it.
    """

    coeff: np.ndarray
    sigma_eps: float
    factors: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        coeff = np.array(self.coeff, dtype=float)
        if coeff.ndim != 2 or coeff.size == 0:
            raise ParameterError(f"coeff must be a 2-D matrix, got shape {coeff.shape}")
        if not np.isfinite(coeff).all():
            raise ParameterError("coeff must be finite")
        coeff.flags.writeable = False
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "sigma_eps", _require_finite("sigma_eps", self.sigma_eps))
        if self.sigma_eps <= 0.0:
            raise ParameterError(f"sigma_eps must be positive, got {self.sigma_eps}")
        if self.factors is not None:
            u, s, vt = (np.array(m, dtype=float) for m in self.factors)
            q, p = coeff.shape
            r = s.shape[0]
            if u.shape != (q, r) or vt.shape != (r, p) or s.ndim != 1:
                raise ParameterError(
                    f"factor shapes {u.shape}, {s.shape}, {vt.shape} do not match coeff {coeff.shape}"
                )
            scale = max(1.0, float(np.abs(coeff).max()))
            if np.abs(u.T @ u - np.eye(r)).max() > 1e-8 or np.abs(vt @ vt.T - np.eye(r)).max() > 1e-8:
                raise ParameterError("factor columns must be orthonormal")
            if np.abs(u @ np.diag(s) @ vt - coeff).max() > 1e-8 * scale:
                raise ParameterError("factors do not reconstruct coeff")
            for m in (u, s, vt):
                m.flags.writeable = False
            object.__setattr__(self, "factors", (u, s, vt))

    @classmethod
    def from_factors(cls, u, s, vt, sigma_eps: float) -> "RrrParams":
        u = np.asarray(u, float)
        s = np.asarray(s, float)
        vt = np.asarray(vt, float)
        return cls(coeff=u @ np.diag(s) @ vt, sigma_eps=sigma_eps, factors=(u, s, vt))

    @property
    def kind(self) -> ModelKind:
        return ModelKind.RRR

    @property
    def q(self) -> int:
        return self.coeff.shape[0]

    @property
    def p(self) -> int:
        return self.coeff.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RrrParams):
            return NotImplemented
        if self.sigma_eps != other.sigma_eps or not np.array_equal(self.coeff, other.coeff):
            return False
        if (self.factors is None) != (other.factors is None):
            return False
        if self.factors is None:
            return True
        return all(np.array_equal(a, b) for a, b in zip(self.factors, other.factors))

    def __hash__(self) -> int:
        return hash((self.coeff.shape, self.coeff.tobytes(), self.sigma_eps))


ModelPoint = Union[GmmParams, RrrParams]


@dataclass(frozen=True)
class SampleBatch:
    """One simulated dataset plus the seed that produced it.

    data is a float array of shape (n,) for the mixture family and an
    (x, y) pair of arrays with shapes (n, p) and (n, q) for regression.
    """

    kind: ModelKind
    n: int
    data: object
    seed: int

    def __post_init__(self):
        if self.kind == ModelKind.GMM:
            self.data.flags.writeable = False
        else:
            for arr in self.data:
                arr.flags.writeable = False

    @property
    def x(self) -> np.ndarray:
        if self.kind != ModelKind.RRR:
            raise InputError("x is only defined for regression batches")
        return self.data[0]

    @property
    def y(self) -> np.ndarray:
        if self.kind != ModelKind.RRR:
            raise InputError("y is only defined for regression batches")
        return self.data[1]

    @property
    def values(self) -> np.ndarray:
        if self.kind != ModelKind.GMM:
            raise InputError("values is only defined for mixture batches")
        return self.data


def fingerprint(point: ModelPoint) -> bytes:
    """Canonical byte string identifying the induced distribution.

    Equivalent points (label swap for mixtures, any factorization of the same
    coefficient matrix for regression) share a fingerprint; replication
    streams are keyed on it so equivalent grid points see identical samples.
    """
    if isinstance(point, GmmParams):
        (mu_lo, w_lo), (mu_hi, _) = point.canonical_components()
        vals = np.array([mu_lo + 0.0, w_lo + 0.0, mu_hi + 0.0, point.sigma + 0.0])
        return b"G" + vals.tobytes()
    if isinstance(point, RrrParams):
        c = point.coeff + 0.0  # normalizes -0.0
        head = b"R" + point.q.to_bytes(4, "little") + point.p.to_bytes(4, "little")
        return head + c.tobytes() + np.float64(point.sigma_eps + 0.0).tobytes()
    raise InputError(f"not a model point: {type(point).__name__}")


def sample(point: ModelPoint, n: int, seed: int) -> SampleBatch:
    """Draw n observations. Bit-identical for identical (induced law, n, seed)."""
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise InputError(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    rng = substream("singulab.sample", int(seed))
    if isinstance(point, GmmParams):
        (mu_lo, w_lo), (mu_hi, _) = point.canonical_components()
        u = rng.random(n)
        z = rng.standard_normal(n)
        values = np.where(u < w_lo, mu_lo, mu_hi) + point.sigma * z
        return SampleBatch(kind=ModelKind.GMM, n=n, data=values, seed=int(seed))
    if isinstance(point, RrrParams):
        x = rng.standard_normal((n, point.p))
        eps = rng.standard_normal((n, point.q))
        y = x @ point.coeff.T + point.sigma_eps * eps
        return SampleBatch(kind=ModelKind.RRR, n=n, data=(x, y), seed=int(seed))
    raise InputError(f"not a model point: {type(point).__name__}")


def _gmm_log_density(point: GmmParams, x: np.ndarray) -> np.ndarray:
    s = point.sigma
    lw1 = math.log(point.pi1) if point.pi1 > 0.0 else -math.inf
    lw2 = math.log(1.0 - point.pi1) if point.pi1 < 1.0 else -math.inf
    a = lw1 - math.log(s) - 0.5 * LOG_2PI - 0.5 * ((x - point.mu1) / s) ** 2
    b = lw2 - math.log(s) - 0.5 * LOG_2PI - 0.5 * ((x - point.mu2) / s) ** 2
    return np.logaddexp(a, b)


def _rrr_log_density(point: RrrParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, float))
    y = np.atleast_2d(np.asarray(y, float))
    if x.shape[-1] != point.p or y.shape[-1] != point.q or x.shape[0] != y.shape[0]:
        raise InputError(
            f"expected x (m, {point.p}) and y (m, {point.q}), got {x.shape} and {y.shape}"
        )
    s = point.sigma_eps
    lp = -0.5 * (point.p * LOG_2PI + (x * x).sum(axis=-1))
    resid = y - x @ point.coeff.T
    lq = -0.5 * (point.q * (LOG_2PI + 2.0 * math.log(s)) + (resid * resid).sum(axis=-1) / (s * s))
    return lp + lq


def log_density(point: ModelPoint, x):
    """Log density of one observation (vectorized over a leading axis).

    For mixtures x is a scalar or array of reals. For regression x is an
    (x, y) pair; the density is the joint law of predictor and response.
    Returns a scalar for scalar input, else an array of shape (m,).
    """
    if isinstance(point, GmmParams):
        arr = np.asarray(x, dtype=float)
        out = _gmm_log_density(point, arr)
        return float(out) if arr.ndim == 0 else out
    if isinstance(point, RrrParams):
        if isinstance(x, SampleBatch):
            xs, ys = x.data
        else:
            try:
                xs, ys = x
            except (TypeError, ValueError):
                raise InputError("regression observations must be an (x, y) pair")
        scalar = np.asarray(xs, float).ndim == 1
        out = _rrr_log_density(point, xs, ys)
        return float(out[0]) if scalar else out
    raise InputError(f"not a model point: {type(point).__name__}")


def batch_seed(base_seed: int, n: int, rep: int, point: ModelPoint) -> int:
    """Seed for replication rep at sample size n from a given grid point.

    Keyed on the point's distribution fingerprint, not its raw coordinates:
    observationally equivalent points must receive identical draws.
    """
    return stream_seed("singulab.rep", int(base_seed), int(n), int(rep), fingerprint(point))
