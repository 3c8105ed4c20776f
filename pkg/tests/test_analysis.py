import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from stallguard.analysis import (
    StallReport,
    UpdateGeometry,
    average_time_constant,
    classify_update,
    correlation_matrix,
    detect_stall,
    mc_update_frequency,
    normal_cdf,
    power_iteration,
    step_size_bound,
    threshold_error,
    two_term_update,
    update_probability_gaussian,
    update_probability_uniform,
    verify_theorem1,
    verify_theorem2,
)
from stallguard.filters import Trajectory, run_filter
from stallguard.fixedpoint import QFormat
from stallguard.noise import NoiseGenerator, NoiseSpec
from stallguard.signals import SampleSequence

Q12 = QFormat(12, 4)


def test_threshold_error():
    assert threshold_error(Q12, 0.01, 0.5) == 0.0244140625
    assert round(threshold_error(Q12, 0.01, 0.5), 4) == 0.0244
    assert threshold_error(QFormat(8, 4), 0.1, 1.0) == 0.01953125
    assert threshold_error(Q12, 0.01, -0.5) == 0.0244140625
    with pytest.raises(ValueError):
        threshold_error(Q12, 0.01, 0.0)


@pytest.mark.parametrize("n, expected", [(0.02, 1), (0.03, 0), (0.0, 0)])
def test_classify_examples(n, expected):
    assert classify_update(n, 0.01, 0.5, 0.01, Q12) == expected
    assert two_term_update(n, 0.01, 0.5, 0.01, Q12) == expected


def test_classify_signs():
    # reflecting u or e flips the direction
    assert classify_update(0.02, 0.01, -0.5, 0.01, Q12) == -1
    assert classify_update(-0.02, -0.01, 0.5, 0.01, Q12) == -1
    assert classify_update(-0.02, -0.01, -0.5, 0.01, Q12) == 1


def test_classify_precondition():
    with pytest.raises(ValueError):
        classify_update(0.0, 0.0, 0.5, 0.01, Q12)
    with pytest.raises(ValueError):
        classify_update(0.0, 0.03, 0.5, 0.01, Q12)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-3, 0.1), st.floats(0.05, 1.0), st.sampled_from([-1.0, 1.0]),
       st.floats(1e-6, 1 - 1e-6), st.sampled_from([-1.0, 1.0]), st.floats(-20.0, 20.0),
       st.integers(6, 20))
def test_classifier_agrees_with_quantizer(mu, u_abs, u_sign, frac, e_sign, n_periods, bits):
    fmt = QFormat(bits, 4)
    u = u_sign * u_abs
    l = fmt.lsb / (2 * mu * u_abs)
    e = e_sign * frac * l
    n = n_periods * l
    # window edges are ties; continuous noise hits them with probability zero
    nc = math.copysign(n, e) / l
    for edge in (nc, nc + abs(e) / l):
        assume(abs((edge + 1) / 2 - round((edge + 1) / 2)) > 1e-9)
    direct = two_term_update(n, e, u, mu, fmt)
    assert classify_update(n, e, u, mu, fmt) == direct
    assert direct in (0, int(np.sign(u * e)))


def test_theorem_checks_small():
    assert verify_theorem1(20_000, seed=3).passed
    assert verify_theorem2(50_000, seed=3).passed


def test_uniform_probability():
    assert update_probability_uniform(UpdateGeometry(0.3, 0.1)) == pytest.approx(1 / 6)
    assert update_probability_uniform(UpdateGeometry(0.3, 0.0)) == 0.0
    assert update_probability_uniform(UpdateGeometry(0.3, 0.3)) == 0.5
    with pytest.raises(ValueError):
        update_probability_uniform(UpdateGeometry(0.3, 0.31))


def test_uniform_probability_is_mu_u_e_over_lsb():
    g = UpdateGeometry.from_tap(Q12, 0.01, 0.5, 0.01)
    assert update_probability_uniform(g) == pytest.approx(0.01 * 0.5 * 0.01 / Q12.lsb)


def test_normal_cdf():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-15)
    assert normal_cdf(-8.0) == pytest.approx(6.22096057427178e-16, rel=1e-12)


def test_gaussian_probability_limits():
    l = 0.03
    g = UpdateGeometry(l, l / 3)
    assert abs(update_probability_gaussian(g, 100 * l) - 1 / 6) < 1e-3
    assert update_probability_gaussian(g, l / 1000) < 1e-12


def direct_series(l, e, sigma, kmax=2000):
    """Brute-force partial sum of interval masses over |k| <= kmax."""
    total = 0.0
    for k in range(-kmax, kmax + 1):
        hi = (2 * k - 1) * l
        total += normal_cdf(hi / sigma) - normal_cdf((hi - e) / sigma)
    return total


@pytest.mark.parametrize("l, sigma", [(0.02, 0.01), (0.02, 0.05), (0.05, 0.3), (0.1, 0.05)])
def test_gaussian_series_matches_brute_force(l, sigma):
    g = UpdateGeometry(l, l / 3)
    assert update_probability_gaussian(g, sigma) == pytest.approx(direct_series(l, l / 3, sigma),
                                                                  abs=1e-12)


@pytest.mark.parametrize("l, sigma", [(0.02, 0.02), (0.04, 0.1)])
def test_gaussian_probability_vs_monte_carlo(l, sigma):
    g = UpdateGeometry(l, l / 3)
    f, se = mc_update_frequency(g, sigma, 200_000, seed=1)
    assert abs(update_probability_gaussian(g, sigma) - f) <= 3 * se


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 1.0), st.floats(0.01, 0.99), st.floats(1e-3, 10.0))
def test_gaussian_probability_in_unit_interval(l, frac, sigma):
    p = update_probability_gaussian(UpdateGeometry(l, frac * l), sigma)
    assert 0.0 <= p <= 1.0


def test_gaussian_trends_on_grid():
    ls = [0.01, 0.02, 0.03, 0.05, 0.08]
    sigmas = [0.005, 0.01, 0.02, 0.05, 0.1]
    e = 0.005
    p = np.array([[update_probability_gaussian(UpdateGeometry(l, e), s) for s in sigmas] for l in ls])
    # slack covers erfc round-off once P has saturated at e/(2l)
    assert np.all(np.diff(p, axis=0) <= 1e-12)
    assert np.all(np.diff(p, axis=1) >= -1e-12)


def test_correlation_matrix_and_bounds():
    r = correlation_matrix(np.array([1.0, 2.0, 3.0]), 2)
    # windows [2, 1] and [3, 2]
    np.testing.assert_allclose(r, np.array([[6.5, 4.0], [4.0, 2.5]]))
    x = NoiseGenerator(NoiseSpec.gaussian(1.0, 2)).sample_many(100_000)
    mu_tr, mu_eig = step_size_bound(SampleSequence(x), 3)
    assert mu_tr == pytest.approx(2 / 3, rel=0.05)
    assert mu_tr <= mu_eig
    with pytest.raises(ValueError):
        step_size_bound(np.zeros(50), 3)


def test_power_iteration():
    lam, _, _ = power_iteration(np.diag([1.0, 2.0]))
    assert lam == pytest.approx(2.0, abs=1e-9)
    rng = np.random.default_rng(0)
    a = rng.normal(size=(6, 6))
    r = a @ a.T
    lam, v, _ = power_iteration(r)
    assert lam == pytest.approx(np.linalg.eigvalsh(r)[-1], rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32))
def test_trace_bound_is_conservative(m, seed):
    x = np.random.default_rng(seed).normal(size=200)
    mu_tr, mu_eig = step_size_bound(x, m)
    assert mu_tr <= mu_eig * (1 + 1e-9)


def test_average_time_constant():
    assert average_time_constant(np.eye(4), 0.01) == pytest.approx(50.0)
    assert average_time_constant(np.diag([1.0, 3.0]), 0.25) == pytest.approx(1.0)
    r = np.diag([1.0, 2.0, 5.0])
    assert average_time_constant(3 * r, 0.1) == pytest.approx(average_time_constant(r, 0.1) / 3)
    with pytest.raises(ValueError):
        average_time_constant(np.zeros((2, 2)), 0.1)


def traj_from_mask(mask, errors=None):
    mask = np.asarray(mask, dtype=bool).reshape(len(mask), -1)
    t = len(mask)
    errors = np.ones(t) if errors is None else np.asarray(errors)
    return Trajectory("x", np.arange(1, t + 1), errors, np.zeros(t), mask, None)


def test_detect_stall():
    frozen = traj_from_mask(np.zeros((80, 2)))
    assert detect_stall(frozen) == StallReport(True, 1, 1.0)
    mask = np.zeros((100, 2))
    mask[29, 1] = 1
    errors = np.r_[np.full(30, 5.0), np.full(70, 2.0)]
    assert detect_stall(traj_from_mask(mask, errors)) == StallReport(True, 31, 2.0)
    mask[60, 0] = 1
    assert not detect_stall(traj_from_mask(mask)).stalled
    with pytest.raises(ValueError):
        detect_stall(traj_from_mask(np.zeros((0, 2))))


def test_infinite_lms_on_noise_never_stalls():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(1, 600))
    tr = run_filter("lms_inf", np.zeros((1, 3)), x, rng.normal(size=(1, 600)), np.arange(600),
                    taps=4, mu=0.01, fmt=None)
    assert not detect_stall(tr).stalled
