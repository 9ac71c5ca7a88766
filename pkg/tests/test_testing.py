"""The four decision rules and the worst-case error-curve machinery."""

import numpy as np
import pytest

from singulab import divergence as dv
from singulab import registry, testing
from singulab.errors import InputError
from singulab.models import GmmParams, ModelKind, RrrParams, SampleBatch, sample
from singulab.testing import (
    MixtureCalibration,
    OrderingCalibration,
    RankCalibration,
    SignCalibration,
    estimate_error_curve,
    make_gmm_mixture_test,
    make_gmm_ordering_test,
    make_rrr_rank_test,
    make_rrr_sign_test,
)

ORDERED = GmmParams(2.0, -2.0, 1.0, 0.5)
SWAPPED = GmmParams(-2.0, 2.0, 1.0, 0.5)


def band(reps, p=0.05):
    # two 95% binomial half-widths around the nominal level
    return 2 * 1.96 * np.sqrt(p * (1 - p) / reps)


# ---------------------------------------------------------------------------
# ordering test

def test_witness_grid_error_sums_are_exactly_one():
    proc = make_gmm_ordering_test()
    curve = estimate_error_curve(
        proc, [ORDERED], [SWAPPED], sample_sizes=(100, 300), reps=100, base_seed=0
    )
    assert curve.sums() == (1.0, 1.0)


def test_same_point_in_both_grids_sums_to_one():
    proc = make_gmm_ordering_test()
    point = GmmParams(1.0, -1.0, 1.0, 0.5)
    curve = estimate_error_curve(
        proc, [point], [point], sample_sizes=(200,), reps=100, base_seed=1
    )
    assert curve.sums() == (1.0,)
    # ...which certainly clears the advertised lower bound
    assert curve.sums()[0] >= 1.0 - 2 * curve.mc_half_width


def test_ordering_decision_is_fair_coin_on_degenerate_data():
    proc = make_gmm_ordering_test()
    point = GmmParams(0.0, 0.0, 1.0, 0.5)
    rejected, ok, failed = testing._rejection_rate(proc, point, 200, 500, base_seed=0)
    assert failed == 0
    rate = rejected / ok
    assert 0.4 <= rate <= 0.6


# ---------------------------------------------------------------------------
# mixture presence test

def test_mixture_test_size_near_nominal():
    proc = make_gmm_mixture_test()
    rejected, ok, failed = testing._rejection_rate(
        proc, GmmParams(0.0, 0.0, 1.0, 0.5), 500, 500, base_seed=0
    )
    assert failed == 0
    assert 0.02 <= rejected / ok <= 0.09


def test_mixture_test_power_grows_with_n():
    proc = make_gmm_mixture_test()
    alt = GmmParams(-1.5, 1.5, 1.0, 0.5)  # gap of three sigma
    powers = []
    for n in (100, 300, 1000):
        rejected, ok, _ = testing._rejection_rate(proc, alt, n, 150, base_seed=0)
        powers.append(rejected / ok)
    assert powers[0] <= powers[1] <= powers[2]
    assert powers[2] >= 0.9


def test_mixture_test_on_boundary_alternative_rejects_at_nominal():
    # gap-zero "alternative" is a single Gaussian, i.e. lies in the null
    proc = make_gmm_mixture_test()
    rejected, ok, _ = testing._rejection_rate(
        proc, GmmParams(0.5, 0.5, 1.0, 0.5), 500, 150, base_seed=0
    )
    assert abs(rejected / ok - 0.05) <= band(150)


# ---------------------------------------------------------------------------
# rank test

def test_rank_test_size_at_rank_zero_null():
    proc = make_rrr_rank_test(r0=0)
    point = RrrParams(np.zeros((2, 3)), 1.0)
    rejected, ok, failed = testing._rejection_rate(proc, point, 500, 200, base_seed=0)
    assert failed == 0
    assert abs(rejected / ok - 0.05) <= band(200)


def test_rank_test_power_at_separated_alternative():
    proc = make_rrr_rank_test(r0=1)
    alt = registry.POINTS["rrr-rank2-ref"]  # smallest singular value 0.8
    rejected, ok, _ = testing._rejection_rate(proc, alt, 2000, 100, base_seed=0)
    assert rejected / ok >= 0.95


def test_rank_test_size_controlled_across_sample_sizes():
    proc = make_rrr_rank_test(r0=1)
    null = registry.POINTS["rrr-rank1-ref"]
    for n in (100, 500, 2000):
        rejected, ok, _ = testing._rejection_rate(proc, null, n, 100, base_seed=0)
        assert rejected / ok <= 0.05 + band(100), n


def test_rank_test_rejects_undersized_batches():
    proc = make_rrr_rank_test(r0=0)
    point = RrrParams(np.zeros((2, 3)), 1.0)
    batch = sample(point, 3, seed=0)  # n = p
    with pytest.raises(InputError):
        proc.decide(batch)


# ---------------------------------------------------------------------------
# sign test

def test_sign_witness_sums_to_one():
    null, alt, actions = registry.hypothesis_for("rrr-sign")
    proc = make_rrr_sign_test()
    w0 = registry.POINTS["rrr-sign-ref"]
    from singulab.equivalence import RRR_SIGN_FLIP

    curve = estimate_error_curve(
        proc, [w0], [RRR_SIGN_FLIP(w0)], sample_sizes=(100, 1000), reps=100, base_seed=0
    )
    assert curve.sums() == (1.0, 1.0)


def test_sign_tie_accepts_and_flags():
    # Noise-free batch whose OLS estimate is diag(0, 3): the leading left
    # singular vector has first entry exactly zero.
    x = np.tile(np.eye(2), (2, 1))
    coeff = np.array([[0.0, 0.0], [0.0, 3.0]])
    y = x @ coeff.T
    batch = SampleBatch(kind=ModelKind.RRR, n=4, data=(x, y), seed=0)
    decision, diag = make_rrr_sign_test().decide_with_diagnostics(batch)
    assert decision == 0
    assert diag["tie"] is True
    assert diag["u11"] == 0.0


def test_sign_tie_tolerance_is_configurable():
    # leading direction a hair off the second axis: u11 = -1e-9 after the
    # sign convention, inside the loose tolerance but outside the strict one
    th = 1e-9
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    coeff = rot @ np.diag([0.5, 3.0])
    x = np.tile(np.eye(2), (2, 1))
    y = x @ coeff.T
    batch = SampleBatch(kind=ModelKind.RRR, n=4, data=(x, y), seed=0)
    strict = make_rrr_sign_test(SignCalibration(tie_tol=1e-12))
    loose = make_rrr_sign_test(SignCalibration(tie_tol=1e-6))
    decision, diag = strict.decide_with_diagnostics(batch)
    assert (decision, diag["tie"]) == (1, False)
    decision, diag = loose.decide_with_diagnostics(batch)
    assert (decision, diag["tie"]) == (0, True)


# ---------------------------------------------------------------------------
# error-curve machinery

def test_error_curves_are_bit_identical_across_runs():
    proc = make_rrr_sign_test()
    grids = dict(
        null_grid=[registry.POINTS["rrr-sign-ref"]],
        alt_grid=[registry.POINTS["rrr-zero-1x1"]],
    )
    a = estimate_error_curve(proc, sample_sizes=(50, 100), reps=120, base_seed=7, **grids)
    b = estimate_error_curve(proc, sample_sizes=(50, 100), reps=120, base_seed=7, **grids)
    assert a == b


def test_error_curve_requires_enough_reps():
    proc = make_rrr_sign_test()
    with pytest.raises(InputError):
        estimate_error_curve(
            proc, [ORDERED], [SWAPPED], sample_sizes=(100,), reps=50, base_seed=0
        )


def test_error_curve_reports_worst_case_over_grid():
    proc = make_gmm_ordering_test()
    # second null point is the swapped (equivalent) parameter: always worse
    curve = estimate_error_curve(
        proc,
        [GmmParams(3.0, -3.0, 1.0, 0.5), SWAPPED],
        [SWAPPED],
        sample_sizes=(300,),
        reps=100,
        base_seed=0,
    )
    per_point = [row[0] for row in curve.null_rejection]
    assert curve.alpha_hat[0] == max(per_point)
    assert curve.worst_null[0] == int(np.argmax(per_point))


def test_error_sum_decreases_with_n_once_hypotheses_separate():
    # Rank hypothesis with a weak but genuinely rank-2 alternative: positive
    # Hellinger separation, so the summed errors must fall as data accrues.
    # The n-grid spans the power transition; at larger n both errors sit on
    # the noise floor and the comparison would be pure Monte Carlo jitter.
    base = registry.POINTS["rrr-rank1-ref"]
    ref = registry.POINTS["rrr-rank2-ref"]
    u, s, vt = np.linalg.svd(ref.coeff)
    s2 = s.copy()
    s2[1] = 0.25
    alt = RrrParams((u[:, :2] * s2[:2]) @ vt[:2, :], ref.sigma_eps)

    sep = dv.regime_separation([base], [alt])
    assert sep.inf_h > 0

    proc = registry.make_test("rrr-rank", {"r0": 1})
    curve = estimate_error_curve(
        proc, [base], [alt], sample_sizes=(50, 100, 200, 400), reps=150, base_seed=0
    )
    sums = curve.sums()
    assert all(sums[i + 1] < sums[i] for i in range(len(sums) - 1)), sums
