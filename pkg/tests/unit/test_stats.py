import math

import numpy as np
import pytest

from rmc.exceptions import ClientException
from rmc.model import Box, ScalarField, TargetSpec, validate_target
from rmc.samplers import srmc_sample
from rmc.stats import (SummaryStats, _merge_small_cells, chi_square_box, chi_square_quantile_999, ks_test_1d,
                       predicted_acceptance, summarize)

GAUSSIAN = 'exp(-(x^2 + y^2 - 0.4*x*y)/1.92)/(2*pi*sqrt(0.96))'


def sine_cdf(x):
    return 0.5 - np.cos(x) / math.sqrt(2)


def sine_target():
    field = ScalarField.parse('sin(x)/sqrt(2)', 'x')
    return validate_target(field, Box((math.pi / 4,), (3 * math.pi / 4,)), 1.1)


def test_summarize_small_example():
    summary = summarize(np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 4.0]]))
    assert summary.n == 3
    assert summary.mean.tolist() == [1.0, 2.0]
    assert np.allclose(summary.covariance, [[1.0, 2.0], [2.0, 4.0]])
    assert abs(summary.correlation[0, 1] - 1.0) < 1e-12


def test_summarize_matches_numpy_across_blocks():
    points = np.random.RandomState(1).normal(size=(10000, 3))
    summary = summarize(points)
    assert np.allclose(summary.mean, points.mean(axis=0))
    assert np.allclose(summary.covariance, np.cov(points, rowvar=False))


def test_merge_is_associative():
    points = np.random.RandomState(2).uniform(size=(300, 2))
    a, b, c = (SummaryStats.of_points(p) for p in (points[:100], points[100:150], points[150:]))
    left = a.merge(b).merge(c)
    right = a.merge(b.merge(c))
    assert left.n == right.n == 300
    assert np.allclose(left.comoment, right.comoment)
    assert np.allclose(left.covariance, SummaryStats.of_points(points).covariance)


def test_zero_variance_dimension_is_undefined():
    summary = summarize(np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]))
    assert math.isnan(summary.correlation[0, 1])
    report = summary.to_dict()
    assert report['correlation'][0][1] is None
    assert report['correlation'][1][1] == 1.0


def test_summarize_needs_two_points():
    with pytest.raises(ClientException):
        summarize(np.array([[1.0, 2.0]]))


def test_ks_quantile_samples_pass():
    n = 1000
    p = (np.arange(1, n + 1) - 0.5) / n
    samples = np.arccos((0.5 - p) * math.sqrt(2))
    report = ks_test_1d(samples, sine_cdf)
    assert abs(report.statistic - 0.5 / n) < 1e-9
    assert report.passed
    assert report.threshold == 1.628 / math.sqrt(n)


def test_ks_rejects_wrong_distribution():
    samples = np.sort(np.random.RandomState(3).uniform(size=1000))
    report = ks_test_1d(samples, sine_cdf, alpha=0.05)
    assert report.statistic > 0.2
    assert not report.passed
    assert report.to_dict()['pass'] is False


def test_ks_requires_sorted_samples_and_known_alpha():
    with pytest.raises(ClientException):
        ks_test_1d(np.array([2.0, 1.0]), sine_cdf)
    with pytest.raises(ClientException):
        ks_test_1d(np.array([1.0, 2.0]), sine_cdf, alpha=0.1)


def test_chi_square_quantile():
    assert chi_square_quantile_999(1) == 10.828
    assert abs(chi_square_quantile_999(63) - 103.442) < 0.5
    with pytest.raises(ClientException):
        chi_square_quantile_999(0)


def test_predicted_acceptance():
    assert abs(predicted_acceptance(1, 1.1, math.pi / 2) - 0.5787) < 1e-4
    assert abs(predicted_acceptance(1, 0.1657, 100) - 0.0603) < 1e-4
    with pytest.raises(ClientException):
        predicted_acceptance(0, 1, 1)


def test_small_cells_are_merged():
    group = _merge_small_cells(np.array([10.0, 1.0, 1.0, 10.0]), (4,))
    labels = np.unique(group)
    assert len(labels) == 2
    expected = np.array([10.0, 1.0, 1.0, 10.0])
    assert all(expected[group == label].sum() >= 5 for label in labels)


def test_chi_square_passes_for_sine_histogram():
    batch = srmc_sample(sine_target(), 100000, 6)
    report = chi_square_box(batch, sine_target(), 64)
    assert report.kind == 'chi-square'
    assert report.dof == 63
    assert report.passed


def test_chi_square_passes_for_gaussian():
    field = ScalarField.parse(GAUSSIAN, 'x,y')
    target = validate_target(field, Box((-5.0, -5.0), (5.0, 5.0)), 0.1657)
    report = chi_square_box(srmc_sample(target, 20000, 12), target, 8)
    assert report.passed
    assert report.dof < 63


def test_chi_square_rejects_uniform_samples():
    field = ScalarField.parse(GAUSSIAN, 'x,y')
    target = TargetSpec(field, Box((-5.0, -5.0), (5.0, 5.0)), 0.1657)
    uniform = np.random.RandomState(4).uniform(-5, 5, size=(5000, 2))
    report = chi_square_box(uniform, target, 8)
    assert not report.passed


@pytest.mark.slow
def test_chi_square_rejects_misspecified_correlation():
    box = Box((-5.0, -5.0), (5.0, 5.0))
    sampled = validate_target(ScalarField.parse(GAUSSIAN, 'x,y'), box, 0.1657)
    expected = TargetSpec(ScalarField.parse('exp(-(x^2 + y^2 - 1.6*x*y)/0.72)/(2*pi*0.6)', 'x,y'), box, 0.3)
    report = chi_square_box(srmc_sample(sampled, 100000, 8), expected, 8)
    assert not report.passed
    assert report.statistic > 10 * report.threshold
