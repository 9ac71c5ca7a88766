"""Sampling and log-density behavior of the two model families."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from singulab.errors import InputError, ParameterError
from singulab.models import (
    GmmParams,
    RrrParams,
    SampleBatch,
    batch_seed,
    fingerprint,
    log_density,
    sample,
)

LOG_INV_SQRT_2PI = -0.5 * math.log(2.0 * math.pi)


def test_degenerate_mixture_is_standard_normal():
    batch = sample(GmmParams(0.0, 0.0, 1.0, 0.5), 1000, seed=7)
    assert abs(float(np.mean(batch.values))) <= 0.1


def test_zero_coefficient_rrr_has_uncorrelated_blocks():
    point = RrrParams(np.zeros((2, 3)), 1.0)
    batch = sample(point, 500, seed=3)
    for i in range(3):
        for j in range(2):
            corr = np.corrcoef(batch.x[:, i], batch.y[:, j])[0, 1]
            assert abs(corr) <= 0.1


def test_mixture_variance_matches_moment_formula():
    # Var = sigma^2 + pi1*pi2*(mu1-mu2)^2 = 1 + 0.25*16 = 5 for this point.
    batch = sample(GmmParams(-2.0, 2.0, 1.0, 0.5), 100_000, seed=5)
    var = float(np.var(batch.values))
    assert abs(var - 5.0) <= 0.02 * 5.0


def test_gmm_log_density_at_standard_normal_mode():
    val = log_density(GmmParams(0.0, 0.0, 1.0, 0.5), np.array([0.0]))
    assert abs(val[0] - LOG_INV_SQRT_2PI) < 1e-12


def test_gmm_log_density_symmetric_pair_at_origin():
    # 0.5*phi(-1) + 0.5*phi(1) = phi(1) by symmetry of the density around 0.
    val = log_density(GmmParams(-1.0, 1.0, 1.0, 0.5), np.array([0.0]))[0]
    direct = math.log(0.5 * math.exp(-0.5) / math.sqrt(2 * math.pi) * 2)
    assert abs(val - direct) < 1e-12
    assert abs(val - (LOG_INV_SQRT_2PI - 0.5)) < 1e-12


def test_rrr_log_density_two_independent_standard_normals():
    point = RrrParams(np.zeros((1, 1)), 1.0)
    val = log_density(point, (np.array([[0.0]]), np.array([[0.0]])))
    assert abs(val[0] - 2.0 * LOG_INV_SQRT_2PI) < 1e-12


def test_sampling_is_deterministic():
    p = GmmParams(-1.0, 2.0, 0.7, 0.3)
    a = sample(p, 257, seed=42)
    b = sample(p, 257, seed=42)
    assert np.array_equal(a.values, b.values)
    c = sample(p, 257, seed=43)
    assert not np.array_equal(a.values, c.values)

    r = RrrParams(np.array([[1.0, 0.5], [0.0, 2.0]]), 1.3)
    ra = sample(r, 64, seed=9)
    rb = sample(r, 64, seed=9)
    assert np.array_equal(ra.x, rb.x) and np.array_equal(ra.y, rb.y)


def test_gmm_density_normalizes():
    p = GmmParams(-2.0, 3.0, 0.8, 0.25)
    grid = np.linspace(-12.0, 13.0, 20001)
    dens = np.exp(log_density(p, grid))
    total = np.trapezoid(dens, grid)
    assert abs(total - 1.0) < 1e-6


def test_rrr_1x1_density_normalizes():
    p = RrrParams(np.array([[0.8]]), 1.2)
    g = np.linspace(-10.0, 10.0, 501)
    xs, ys = np.meshgrid(g, g, indexing="ij")
    pts = (xs.reshape(-1, 1), ys.reshape(-1, 1))
    dens = np.exp(log_density(p, pts)).reshape(xs.shape)
    total = np.trapezoid(np.trapezoid(dens, g, axis=1), g)
    assert abs(total - 1.0) < 1e-4


def test_label_swap_leaves_density_unchanged():
    p = GmmParams(-1.5, 0.7, 1.1, 0.3)
    q = GmmParams(0.7, -1.5, 1.1, 0.7)
    x = np.linspace(-6, 6, 101)
    assert np.max(np.abs(log_density(p, x) - log_density(q, x))) <= 1e-12


def test_factor_sign_flip_gives_identical_density():
    u, s, vt = np.linalg.svd(np.array([[1.2, 0.3], [0.1, 0.8]]))
    a = RrrParams.from_factors(u, s, vt, 1.0)
    b = RrrParams.from_factors(-u, s, -vt, 1.0)
    batch = sample(a, 50, seed=2)
    pts = (batch.x, batch.y)
    assert np.array_equal(log_density(a, pts), log_density(b, pts))


def test_nonpositive_sigma_rejected():
    with pytest.raises(ParameterError):
        GmmParams(0.0, 1.0, 0.0, 0.5)
    with pytest.raises(ParameterError):
        GmmParams(0.0, 1.0, -1.0, 0.5)
    with pytest.raises(ParameterError):
        RrrParams(np.zeros((1, 1)), 0.0)


def test_mixture_weight_outside_unit_interval_rejected():
    with pytest.raises(ParameterError):
        GmmParams(0.0, 1.0, 1.0, 1.5)


def test_rrr_density_shape_mismatch_is_input_error():
    p = RrrParams(np.zeros((2, 3)), 1.0)
    with pytest.raises(InputError):
        log_density(p, (np.zeros((5, 2)), np.zeros((5, 2))))


def test_fingerprint_identifies_swapped_labels():
    a = GmmParams(2.0, -2.0, 1.0, 0.5)
    b = GmmParams(-2.0, 2.0, 1.0, 0.5)
    assert fingerprint(a) == fingerprint(b)
    assert fingerprint(a) != fingerprint(GmmParams(2.0, -2.0, 1.0, 0.4))


def test_fingerprint_identifies_sign_flipped_factors():
    u, s, vt = np.linalg.svd(np.array([[1.0, 0.2], [0.4, 0.9]]))
    a = RrrParams.from_factors(u, s, vt, 1.0)
    b = RrrParams.from_factors(-u, s, -vt, 1.0)
    assert fingerprint(a) == fingerprint(b)


def test_equivalent_points_draw_identical_samples():
    # The replication stream is keyed by the induced law, not the labeling,
    # so observationally equivalent parameters yield the same data.
    a = GmmParams(2.0, -2.0, 1.0, 0.5)
    b = GmmParams(-2.0, 2.0, 1.0, 0.5)
    sa = batch_seed(0, 500, 3, a)
    sb = batch_seed(0, 500, 3, b)
    assert sa == sb
    assert np.array_equal(sample(a, 500, sa).values, sample(b, 500, sb).values)


@given(
    mu1=st.floats(-5, 5),
    mu2=st.floats(-5, 5),
    sigma=st.floats(0.1, 4.0),
    pi1=st.floats(0.0, 1.0),
    seed=st.integers(0, 2**31),
)
def test_gmm_sample_determinism_property(mu1, mu2, sigma, pi1, seed):
    p = GmmParams(mu1, mu2, sigma, pi1)
    a = sample(p, 16, seed)
    b = sample(p, 16, seed)
    assert np.array_equal(a.values, b.values)
    assert a.n == 16 and a.seed == seed


@given(
    mu1=st.floats(-5, 5),
    mu2=st.floats(-5, 5),
    sigma=st.floats(0.1, 4.0),
    pi1=st.floats(0.0, 1.0),
)
def test_gmm_log_density_finite_property(mu1, mu2, sigma, pi1):
    p = GmmParams(mu1, mu2, sigma, pi1)
    x = np.linspace(-8, 8, 33)
    vals = log_density(p, x)
    assert np.all(np.isfinite(vals))


@given(c=st.floats(-3, 3), sig=st.floats(0.2, 3.0), seed=st.integers(0, 2**31))
def test_rrr_1x1_sample_shapes_property(c, sig, seed):
    p = RrrParams(np.array([[c]]), sig)
    batch = sample(p, 8, seed)
    assert batch.x.shape == (8, 1) and batch.y.shape == (8, 1)
    assert isinstance(batch, SampleBatch)
