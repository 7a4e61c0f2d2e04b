# -*- coding: utf-8 -*-
"""
Empirical summaries and goodness-of-fit checks for sampler output.

Thresholds are fixed quantiles rather than p-values: KS uses the asymptotic critical
values for alpha 0.05 and 0.01, chi-square uses its 0.999 quantile.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ClientException
from .model import SampleBatch, grid_points

KS_COEFFICIENTS = {
    0.05: 1.358,
    0.01: 1.628,
}

Z_999 = 3.090232306167813

# Exact 0.999 quantiles for small dof, where the cube-root approximation is weakest.
CHI_SQUARE_999 = {
    1: 10.828, 2: 13.816, 3: 16.266, 4: 18.467, 5: 20.515,
    6: 22.458, 7: 24.322, 8: 26.124, 9: 27.877, 10: 29.588,
}

MIN_EXPECTED = 5.0
SUMMARY_BLOCK = 4096
MAX_QUADRATURE_POINTS = 2 ** 24


def chi_square_quantile_999(dof):
    if dof < 1:
        raise ClientException('chi-square needs at least one degree of freedom')
    if dof in CHI_SQUARE_999:
        return CHI_SQUARE_999[dof]
    h = 2.0 / (9.0 * dof)
    return dof * (1.0 - h + Z_999 * math.sqrt(h)) ** 3


@dataclass(frozen=True)
class SummaryStats(object):
    """
    Count, mean and co-moment matrix of a point cloud. Summaries of disjoint parts merge
    associatively, so chunked or parallel reductions give the single-pass result.
    """
    n: int
    mean: np.ndarray
    comoment: np.ndarray

    @classmethod
    def of_points(cls, points):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        mean = points.mean(axis=0)
        centered = points - mean
        return cls(points.shape[0], mean, centered.T @ centered)

    def merge(self, other):
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / n)
        comoment = self.comoment + other.comoment + np.outer(delta, delta) * (self.n * other.n / n)
        return SummaryStats(n, mean, comoment)

    @property
    def dims(self):
        return len(self.mean)

    @property
    def covariance(self):
        """Unbiased covariance (divisor n - 1), symmetrised."""
        cov = self.comoment / (self.n - 1)
        return (cov + cov.T) / 2

    @property
    def defined(self):
        """Dimensions with nonzero variance."""
        return np.diag(self.comoment) > 0

    @property
    def correlation(self):
        """Correlation matrix; entries involving a zero-variance dimension are NaN (undefined)."""
        cov = self.covariance
        sd = np.sqrt(np.where(self.defined, np.diag(cov), np.nan))
        with np.errstate(invalid='ignore', divide='ignore'):
            corr = np.clip(cov / np.outer(sd, sd), -1.0, 1.0)
        np.fill_diagonal(corr, np.where(self.defined, 1.0, np.nan))
        return corr

    def to_dict(self):
        corr = self.correlation
        return {
            'n': self.n,
            'mean': self.mean.tolist(),
            'covariance': self.covariance.tolist(),
            'correlation': [[None if math.isnan(v) else v for v in row] for row in corr.tolist()],
        }


def summarize(batch):
    """
    Summary of a batch's points, accumulated block by block with stable merges.
    :raises ClientException: with fewer than two points
    """
    points = batch.points if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.shape[0] < 2:
        raise ClientException('need at least two points to summarize, got {}'.format(points.shape[0]))
    summary = SummaryStats(0, np.zeros(points.shape[1]), np.zeros((points.shape[1], points.shape[1])))
    for start in range(0, points.shape[0], SUMMARY_BLOCK):
        summary = summary.merge(SummaryStats.of_points(points[start:start + SUMMARY_BLOCK]))
    return summary


@dataclass(frozen=True)
class GofReport(object):
    kind: str
    statistic: float
    threshold: float
    n: int
    dof: Optional[int] = None

    @property
    def passed(self):
        return self.statistic < self.threshold

    def to_dict(self):
        report = {
            'kind': self.kind,
            'statistic': self.statistic,
            'threshold': self.threshold,
            'n': self.n,
            'pass': self.passed,
        }
        if self.dof is not None:
            report['dof'] = self.dof
        return report


def ks_test_1d(samples, cdf, alpha=0.01):
    """
    One-sample Kolmogorov-Smirnov test.

    :param samples: sorted reals
    :param cdf: vectorised CDF, nondecreasing onto [0, 1]
    :param alpha: 0.05 or 0.01
    """
    if alpha not in KS_COEFFICIENTS:
        raise ClientException('alpha must be one of {}, got {!r}'.format(sorted(KS_COEFFICIENTS), alpha))
    samples = np.asarray(samples, dtype=np.float64).reshape(-1)
    n = len(samples)
    if n == 0:
        raise ClientException('KS test needs at least one sample')
    if np.any(np.diff(samples) < 0):
        raise ClientException('KS test samples must be sorted')
    values = np.asarray(cdf(samples), dtype=np.float64).reshape(-1)
    i = np.arange(1, n + 1)
    statistic = float(max(np.max(i / n - values), np.max(values - (i - 1) / n)))
    return GofReport('ks', statistic, KS_COEFFICIENTS[alpha] / math.sqrt(n), n)


def predicted_acceptance(f_box_integral, c, vol):
    """Acceptance probability of uniform-proposal rejection: (integral of f over the box) / (c * vol)."""
    if f_box_integral <= 0 or c <= 0 or vol <= 0:
        raise ClientException('predicted_acceptance needs positive inputs')
    return f_box_integral / (c * vol)


def _cell_masses(target, bins, quadrature):
    box = target.support
    shape = tuple(b * quadrature for b in bins)
    if math.prod(shape) > MAX_QUADRATURE_POINTS:
        raise ClientException('quadrature grid of {} points exceeds the limit of {}'.format(
            math.prod(shape), MAX_QUADRATURE_POINTS))
    axes = [lo + (np.arange(s) + 0.5) * ((hi - lo) / s) for (lo, hi), s in zip(box.bounds, shape)]
    values = target.field(grid_points(axes)).reshape(shape)
    split = []
    for b in bins:
        split.extend((b, quadrature))
    masses = values.reshape(split).sum(axis=tuple(range(1, 2 * len(bins), 2)))
    total = masses.sum()
    if total <= 0:
        raise ClientException('target has zero mass on its box')
    return (masses / total).reshape(-1)


def _neighbours(cell, bins):
    index = np.unravel_index(cell, bins)
    for axis in range(len(bins)):
        for step in (-1, 1):
            moved = list(index)
            moved[axis] += step
            if 0 <= moved[axis] < bins[axis]:
                yield int(np.ravel_multi_index(moved, bins))


def _merge_small_cells(expected, bins):
    """
    Groups cells so every group expects at least MIN_EXPECTED counts. Scanning in row-major
    order, a small group is merged into its neighbouring group with the largest expectation.
    """
    group = np.arange(len(expected))
    totals = expected.astype(np.float64).copy()
    changed = True
    while changed and len(np.unique(group)) > 1:
        changed = False
        for cell in range(len(expected)):
            own = group[cell]
            if totals[own] >= MIN_EXPECTED:
                continue
            members = np.flatnonzero(group == own)
            candidates = {group[nb] for m in members for nb in _neighbours(m, bins)} - {own}
            if not candidates:
                continue
            best = max(sorted(candidates), key=lambda g: totals[g])
            group[group == own] = best
            totals[best] += totals[own]
            totals[own] = 0.0
            changed = True
    return group


def chi_square_box(batch, target, bins_per_dim, quadrature=32):
    """
    Binned chi-square test of ``batch`` against ``target`` over a regular partition of its box.

    Expected cell probabilities come from midpoint quadrature with ``quadrature``^d points per
    cell, normalised over the box; cells expecting fewer than 5 counts are merged.
    """
    points = batch.points if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=np.float64)
    box = target.support
    points = points.reshape(-1, box.dims)
    if isinstance(bins_per_dim, int):
        bins_per_dim = (bins_per_dim,) * box.dims
    bins = tuple(int(b) for b in bins_per_dim)
    if len(bins) != box.dims or any(b < 1 for b in bins):
        raise ClientException('need one bin count >= 1 per dimension, got {}'.format(list(bins)))

    n = points.shape[0]
    expected = n * _cell_masses(target, bins, quadrature)
    scaled = (points - box.lower_array) / box.widths * np.array(bins)
    index = [np.clip(np.floor(scaled[:, i]).astype(np.int64), 0, b - 1) for i, b in enumerate(bins)]
    observed = np.bincount(np.ravel_multi_index(index, bins), minlength=len(expected)).astype(np.float64)

    group = _merge_small_cells(expected, bins)
    labels, inverse = np.unique(group, return_inverse=True)
    if len(labels) < 2:
        raise ClientException('too few cells remain after merging to run a chi-square test')
    observed = np.bincount(inverse, weights=observed)
    expected = np.bincount(inverse, weights=expected)
    statistic = float(np.sum((observed - expected) ** 2 / expected))
    dof = len(labels) - 1
    return GofReport('chi-square', statistic, chi_square_quantile_999(dof), n, dof)
