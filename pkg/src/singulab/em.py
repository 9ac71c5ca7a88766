"""Weighted EM for the two-component equal-scale mixture.

Fits run on a binned representation of the sample (exact when n <= bins) so
that cost is independent of n; this is what makes parametric-bootstrap
calibration affordable. The batched entry point fits many datasets times many
restarts in one set of array operations, freezing rows as they converge.

Component slots are never reordered after fitting: which mode ends up in slot
one is decided by the randomized initialization, and downstream tests rely on
that being the case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)

_SIGMA_FLOOR = 1e-10
_PI_CLIP = 1e-10


@dataclass(frozen=True)
class EmSettings:
    restarts: int = 20
    max_iter: int = 500
    tol: float = 1e-8  # relative change of total log-likelihood
    bins: int = 256
    init: str = "random"  # "random" | "spread" (first restart at weighted quartiles)


@dataclass(frozen=True)
class GmmFit:
    mu1: float
    mu2: float
    sigma: float
    pi1: float
    loglik: float
    converged: bool
    n_iter: int


def bin_rows(data: np.ndarray, bins: int):
    """(d, n) samples -> (centers, counts), both (d, m).

    Rows with n <= bins pass through unbinned with unit counts.
    """
    data = np.atleast_2d(np.asarray(data, float))
    d, n = data.shape
    if n <= bins:
        return data, np.ones_like(data)
    lo = data.min(axis=1, keepdims=True)
    hi = data.max(axis=1, keepdims=True)
    width = np.maximum(hi - lo, 1e-12) / bins
    idx = np.minimum(((data - lo) / width).astype(np.int64), bins - 1)
    flat = idx + np.arange(d)[:, None] * bins
    counts = np.bincount(flat.ravel(), minlength=d * bins).reshape(d, bins).astype(float)
    centers = lo + (np.arange(bins) + 0.5) * width
    return centers, counts


def _weighted_pick(centers, counts, u):
    """Sample positions from each row's weighted empirical law; u is (d, k)."""
    cum = np.cumsum(counts, axis=1)
    cum /= cum[:, -1:]
    idx = (cum[:, None, :] < u[:, :, None]).sum(axis=2)
    idx = np.minimum(idx, centers.shape[1] - 1)
    return np.take_along_axis(centers, idx, axis=1)


def _weighted_quantile(centers, counts, q):
    cum = np.cumsum(counts, axis=1)
    cum /= cum[:, -1:]
    idx = (cum < q).sum(axis=1)
    idx = np.minimum(idx, centers.shape[1] - 1)
    return np.take_along_axis(centers, idx[:, None], axis=1)[:, 0]


def fit_binned_many(centers, counts, settings: EmSettings, rng: np.random.Generator):
    """Fit every row of a binned sample stack.

    Returns a dict of per-row arrays: mu1, mu2, sigma, pi1, loglik, converged,
    n_iter. Best restart wins by log-likelihood; ties go to the lower restart
    index, whose labeling is kept as emitted.
    """
    centers = np.atleast_2d(np.asarray(centers, float))
    counts = np.atleast_2d(np.asarray(counts, float))
    d, m = centers.shape
    k = settings.restarts
    n_eff = counts.sum(axis=1)

    mean = (counts * centers).sum(axis=1) / n_eff
    var0 = (counts * (centers - mean[:, None]) ** 2).sum(axis=1) / n_eff
    sd0 = np.sqrt(np.maximum(var0, _SIGMA_FLOOR**2))

    mu_a = _weighted_pick(centers, counts, rng.random((d, k)))
    mu_b = _weighted_pick(centers, counts, rng.random((d, k)))
    jitter = 0.25 * sd0[:, None]
    mu_a = mu_a + jitter * rng.standard_normal((d, k))
    mu_b = mu_b + jitter * rng.standard_normal((d, k))
    if settings.init == "spread":
        mu_a[:, 0] = _weighted_quantile(centers, counts, 0.25)
        mu_b[:, 0] = _weighted_quantile(centers, counts, 0.75)
    elif settings.init != "random":
        raise ValueError(f"unknown init {settings.init!r}")

    # flatten (dataset, restart) into rows
    rows_c = np.repeat(centers, k, axis=0)
    rows_w = np.repeat(counts, k, axis=0)
    rows_n = np.repeat(n_eff, k)
    mu1 = mu_a.reshape(-1)
    mu2 = mu_b.reshape(-1)
    sig = np.repeat(sd0, k)
    pi = np.full(d * k, 0.5)

    total = d * k
    ll_last = np.full(total, -np.inf)
    iters = np.zeros(total, dtype=np.int64)
    done_flag = np.zeros(total, dtype=bool)
    active = np.arange(total)

    for it in range(settings.max_iter):
        c = rows_c[active]
        w = rows_w[active]
        s = sig[active][:, None]
        lw1 = np.log(pi[active])[:, None]
        lw2 = np.log1p(-pi[active])[:, None]
        z1 = lw1 - np.log(s) - 0.5 * LOG_2PI - 0.5 * ((c - mu1[active][:, None]) / s) ** 2
        z2 = lw2 - np.log(s) - 0.5 * LOG_2PI - 0.5 * ((c - mu2[active][:, None]) / s) ** 2
        top = np.maximum(z1, z2)
        lse = top + np.log(np.exp(z1 - top) + np.exp(z2 - top))
        ll = (w * lse).sum(axis=1)

        r1 = np.exp(z1 - lse) * w
        s1 = r1.sum(axis=1)
        r2 = w - r1
        s2 = r2.sum(axis=1)
        new_mu1 = (r1 * c).sum(axis=1) / np.maximum(s1, 1e-300)
        new_mu2 = (r2 * c).sum(axis=1) / np.maximum(s2, 1e-300)
        var = (
            r1 * (c - new_mu1[:, None]) ** 2 + r2 * (c - new_mu2[:, None]) ** 2
        ).sum(axis=1) / rows_n[active]

        mu1[active] = new_mu1
        mu2[active] = new_mu2
        sig[active] = np.sqrt(np.maximum(var, _SIGMA_FLOOR**2))
        pi[active] = np.clip(s1 / rows_n[active], _PI_CLIP, 1.0 - _PI_CLIP)

        moved = np.abs(ll - ll_last[active]) >= settings.tol * np.maximum(1.0, np.abs(ll))
        ll_last[active] = ll
        iters[active] = it + 1
        done_flag[active[~moved]] = True
        active = active[moved]
        if active.size == 0:
            break

    ll_grid = ll_last.reshape(d, k)
    best = ll_grid.argmax(axis=1)
    take = np.arange(d) * k + best
    return {
        "mu1": mu1[take],
        "mu2": mu2[take],
        "sigma": sig[take],
        "pi1": pi[take],
        "loglik": ll_last[take],
        "converged": done_flag[take],
        "n_iter": iters[take],
    }


def fit_many(data: np.ndarray, settings: EmSettings, rng: np.random.Generator):
    centers, counts = bin_rows(data, settings.bins)
    return fit_binned_many(centers, counts, settings, rng)


def fit_one(values: np.ndarray, settings: EmSettings, rng: np.random.Generator) -> GmmFit:
    out = fit_many(np.asarray(values, float)[None, :], settings, rng)
    return GmmFit(
        mu1=float(out["mu1"][0]),
        mu2=float(out["mu2"][0]),
        sigma=float(out["sigma"][0]),
        pi1=float(out["pi1"][0]),
        loglik=float(out["loglik"][0]),
        converged=bool(out["converged"][0]),
        n_iter=int(out["n_iter"][0]),
    )


def gaussian_loglik_binned(centers, counts) -> np.ndarray:
    """Maximized single-Gaussian log-likelihood per row of a binned stack."""
    centers = np.atleast_2d(np.asarray(centers, float))
    counts = np.atleast_2d(np.asarray(counts, float))
    n = counts.sum(axis=1)
    mean = (counts * centers).sum(axis=1) / n
    var = (counts * (centers - mean[:, None]) ** 2).sum(axis=1) / n
    var = np.maximum(var, _SIGMA_FLOOR**2)
    return -0.5 * n * (LOG_2PI + 1.0 + np.log(var))
