# tests/test_estimation.py
import math

import numpy as np
import pytest

from percolab.models.results import ExpansionFit, MonteCarloSummary, joint_z
from percolab.services.estimation import (clt_check, fit_expansion, summarize, survival_pairs,
                                          tail_decay_rate)


def test_summarize_uses_unbiased_variance():
    summary = summarize([1.0, 2.0, 3.0, 4.0])
    assert summary.count == 4
    assert summary.mean == pytest.approx(2.5)
    assert summary.variance == pytest.approx(5.0 / 3.0)
    assert summary.stderr == pytest.approx(math.sqrt(5.0 / 12.0))
    half = 2.5758293035489 * summary.stderr
    assert summary.ci_low == pytest.approx(2.5 - half)
    assert summary.ci_high == pytest.approx(2.5 + half)


def test_summarize_needs_two_samples():
    with pytest.raises(ValueError):
        summarize([1.0])


def test_joint_z_of_identical_means_is_zero():
    a = MonteCarloSummary(10, 1.0, 1.0, 0.1, 0.8, 1.2)
    b = MonteCarloSummary(10, 1.3, 1.0, 0.4, 0.3, 2.3)
    assert joint_z(a, a) == 0.0
    assert joint_z(b, a) == pytest.approx(0.3 / math.hypot(0.1, 0.4))


def polynomial_points(coefficients, sides, stderr=0.1):
    degree = len(coefficients) - 1
    return [(s, sum(c * s ** (degree - k) for k, c in enumerate(coefficients)), stderr)
            for s in sides]


def test_fit_recovers_exact_polynomial():
    points = polynomial_points([0.5, -2.0, 3.0], [2, 4, 6, 8, 10, 12])
    fit = fit_expansion(points, degree=2, sign='minus')
    np.testing.assert_allclose(fit.coefficients, [0.5, -2.0, 3.0], atol=1e-8)
    np.testing.assert_allclose(fit.tau, [2.0, -3.0], atol=1e-8)
    assert fit.rss == pytest.approx(0.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_with_plus_sign_keeps_coefficient_signs():
    points = polynomial_points([0.25, 1.5, -0.5], [5, 10, 15, 20, 25])
    fit = fit_expansion(points, degree=2, sign='plus')
    np.testing.assert_allclose(fit.tau, [1.5, -0.5], atol=1e-8)


def test_fit_recovers_cubic_at_large_sides():
    points = polynomial_points([0.8, -3.0, 2.0, -1.0], [20, 40, 60, 80, 100, 120])
    fit = fit_expansion(points, degree=3)
    np.testing.assert_allclose(fit.coefficients, [0.8, -3.0, 2.0, -1.0], rtol=1e-6, atol=1e-6)


def test_fit_weights_noisy_points_less():
    points = polynomial_points([1.0, 0.0, 0.0], [1, 2, 3, 4, 5])
    side, mean, _ = points[2]
    points[2] = (side, mean + 5.0, 100.0)
    fit = fit_expansion(points, degree=2)
    assert fit.leading == pytest.approx(1.0, abs=0.01)


def test_fit_predicts_between_sides():
    fit = fit_expansion(polynomial_points([0.5, -2.0, 3.0], [2, 4, 6, 8]), degree=2)
    value, stderr = fit.predict(5.0)
    assert value == pytest.approx(0.5 * 25 - 10 + 3)
    assert stderr > 0


def test_tau_interval_brackets_estimate():
    rng = np.random.default_rng(4)
    points = [(s, 0.5 * s * s - 2.0 * s + 3.0 + rng.normal(0, 0.1), 0.1) for s in range(2, 12)]
    fit = fit_expansion(points, degree=2)
    low, high = fit.tau_interval(1)
    assert low < fit.tau[0] < high
    with pytest.raises(ValueError):
        fit.tau_interval(3)


def test_fit_survives_serialization():
    fit = fit_expansion(polynomial_points([0.5, -2.0, 3.0], [2, 4, 6, 8]), degree=2)
    restored = ExpansionFit.from_dict(fit.to_dict())
    np.testing.assert_allclose(restored.coefficients, fit.coefficients)
    assert restored.sign == fit.sign


def test_fit_rejects_duplicate_sides():
    points = polynomial_points([1.0, 0.0, 0.0], [2, 2, 4, 6])
    with pytest.raises(ValueError, match='duplicate'):
        fit_expansion(points, degree=2)


def test_fit_needs_degree_plus_two_sides():
    with pytest.raises(ValueError):
        fit_expansion(polynomial_points([1.0, 0.0, 0.0], [2, 4, 6]), degree=2)


def test_fit_rejects_zero_stderr():
    with pytest.raises(ValueError):
        fit_expansion(polynomial_points([1.0, 0.0, 0.0], [2, 4, 6, 8], stderr=0.0), degree=2)


def test_fit_rejects_unknown_sign():
    with pytest.raises(ValueError):
        fit_expansion(polynomial_points([1.0, 0.0, 0.0], [2, 4, 6, 8]), degree=2, sign='up')


def test_clt_check_accepts_normal_samples():
    values = np.random.default_rng(21).normal(100.0, 7.0, size=4000)
    report = clt_check(values, side=16.0, exponent=1.0)
    assert report.count == 4000
    assert report.ks_pvalue > 0.001
    assert abs(report.skewness) < 0.2
    assert report.sigma_hat == pytest.approx(np.std(values, ddof=1) / 16.0)


def test_clt_check_flags_exponential_samples():
    values = np.random.default_rng(22).exponential(1.0, size=4000)
    assert clt_check(values, side=1.0, exponent=1.0).ks_pvalue < 1e-6


def test_clt_check_needs_enough_samples():
    with pytest.raises(ValueError):
        clt_check(np.arange(499, dtype=float), side=1.0, exponent=1.0)


def test_clt_check_rejects_constant_samples():
    with pytest.raises(ValueError):
        clt_check(np.ones(600), side=1.0, exponent=1.0)


def test_survival_pairs_counts_at_least_threshold():
    assert survival_pairs([0.0, 1.0, 2.0, 2.0, 5.0], [1, 2, 3]) == [(1.0, 0.8), (2.0, 0.6),
                                                                     (3.0, 0.2)]


def test_tail_rate_of_exact_exponential():
    pairs = [(n, math.exp(-0.7 * n)) for n in range(1, 7)]
    fit = tail_decay_rate(pairs)
    assert fit.rate == pytest.approx(0.7)
    assert fit.r_squared == pytest.approx(1.0)
    assert not fit.poor_fit


def test_tail_rate_of_flat_curve_is_poor():
    fit = tail_decay_rate([(1, 0.5), (2, 0.5), (3, 0.5)])
    assert fit.rate == 0.0
    assert fit.r_squared == 0.0
    assert fit.poor_fit


def test_tail_rate_ignores_zero_probabilities():
    with pytest.raises(ValueError):
        tail_decay_rate([(1, 0.5), (2, 0.1), (3, 0.0), (4, 0.0)])


def test_tail_rate_of_geometric_tail():
    fit = tail_decay_rate([(n, 0.5 ** n) for n in range(1, 9)])
    assert fit.rate == pytest.approx(math.log(2))


def test_ks_distance_of_large_normal_sample():
    values = np.random.default_rng(23).standard_normal(10_000)
    assert clt_check(values, side=1.0, exponent=1.0).ks_distance < 0.02


def test_fit_scales_with_the_means():
    wobble = [0.03, -0.05, 0.02, 0.04, -0.01, -0.03]
    points = [(s, m + w, e) for (s, m, e), w in
              zip(polynomial_points([0.5, -2.0, 3.0], [2, 4, 6, 8, 10, 12]), wobble)]
    base = fit_expansion(points, degree=2, sign='minus')
    scaled = fit_expansion([(s, 2.5 * m, e) for s, m, e in points], degree=2, sign='minus')
    np.testing.assert_allclose(scaled.coefficients, 2.5 * base.coefficients, rtol=1e-9)
    assert scaled.r_squared == pytest.approx(base.r_squared)


def test_clt_check_ignores_affine_rescaling():
    values = np.random.default_rng(24).gamma(4.0, size=1000)
    base = clt_check(values, side=10.0, exponent=1.0)
    moved = clt_check(3.0 * values + 7.0, side=10.0, exponent=1.0)
    assert moved.ks_distance == pytest.approx(base.ks_distance, abs=1e-12)
    assert moved.skewness == pytest.approx(base.skewness)
    assert moved.excess_kurtosis == pytest.approx(base.excess_kurtosis)
    assert moved.sigma_hat == pytest.approx(3.0 * base.sigma_hat)


def test_summarize_ignores_sample_order():
    values = np.random.default_rng(25).normal(size=500)
    base = summarize(values)
    shuffled = summarize(np.random.default_rng(26).permutation(values))
    assert shuffled.count == base.count
    assert shuffled.mean == pytest.approx(base.mean, abs=1e-12)
    assert shuffled.variance == pytest.approx(base.variance)
    assert shuffled.ci_high == pytest.approx(base.ci_high)
