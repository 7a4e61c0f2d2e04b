# -*- coding: utf-8 -*-
"""
Region-restricted Monte Carlo integration.

The screened estimator writes the integral of g over a region D inside a box S as

    (integral of g over S) * P(X in D),   X ~ g / (integral of g over S)

estimating the first factor from uniform draws on S and the second from rejection
samples of g. The direct estimator averages g * I(D) over uniform draws and serves as
an independent cross-check; it also handles integrands of either sign.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .exceptions import ClientException, SamplingException
from .model import SAFETY_FACTOR, check_nonnegative, probe_points, validate_target
from .randomness import splitmix64_mix, substream
from .samplers import default_grid, estimate_bound, srmc_sample
from .util import worker_count

logger = logging.getLogger(__name__)

DEFAULT_REPLICATIONS = 10
# Keys the direct estimator's streams apart from the screened estimator's at the same seed
DIRECT_STREAM_TAG = 0x646972656374


@dataclass
class IntegralEstimate(object):
    value: float
    replications: int
    per_replication_values: List[float]
    std_error: float
    n_uniform: int
    n_screened: int
    n_in_region: int
    method: str = 'screened'
    bound_c: Optional[float] = None
    wall_time_ms: float = 0.0

    @classmethod
    def aggregate(cls, values, n_uniform, n_screened, n_in_region, **kwargs):
        values = [float(v) for v in values]
        spread = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        return cls(value=float(np.mean(values)), replications=len(values), per_replication_values=values,
                   std_error=spread / math.sqrt(len(values)), n_uniform=n_uniform, n_screened=n_screened,
                   n_in_region=n_in_region, **kwargs)

    def to_dict(self):
        return {
            'method': self.method,
            'value': self.value,
            'std_error': self.std_error,
            'replications': self.replications,
            'per_replication_values': self.per_replication_values,
            'n_uniform': self.n_uniform,
            'n_screened': self.n_screened,
            'n_in_region': self.n_in_region,
            'bound_c': self.bound_c,
        }


def _check_inputs(g, region, box, n, reps):
    if g.dims != box.dims:
        raise ClientException('{} variables but a {}-dimensional box'.format(g.dims, box.dims))
    if region.vars != g.vars:
        raise ClientException('region variables ({}) differ from integrand variables ({})'.format(region.vars, g.vars))
    if not region.is_indicator:
        raise ClientException('region must be a relation such as "y^2 <= x", got "{}"'.format(region))
    if n < 1 or reps < 1:
        raise ClientException('n and reps must be >= 1, got n={} reps={}'.format(n, reps))


def _replicate(run, reps, threads):
    threads = min(threads or worker_count(), reps)
    if threads <= 1:
        return [run(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(run, range(reps)))


def integrate_screened(g, region, box, n, reps=DEFAULT_REPLICATIONS, seed=0, threads=None, grid_per_dim=None,
                       safety=SAFETY_FACTOR):
    """
    Indicator-screening estimate of the integral of ``g`` over ``region`` (inside ``box``).

    Replication r uses substream(seed, r): n uniform points S1 give A = vol * mean(g), then n
    rejection samples S2 of g give B = #{S2 in region} / n, and the replication value is A * B.

    :param g: nonnegative ScalarField on the box
    :param region: indicator ExprAst over the same variables
    :raises SamplingException: for a negative g at a probe point, or ZERO_MASS when g is 0 on the grid
    :raises BudgetExhausted: propagated from the sampler
    """
    _check_inputs(g, region, box, n, reps)
    started = time.perf_counter()
    points = probe_points(box)
    check_nonnegative(g(points), points)
    bound_c = estimate_bound(g, box, grid_per_dim or default_grid(box.dims), safety)
    if bound_c <= 0:
        raise SamplingException(preset=SamplingException.Preset.ZERO_MASS, data='integrand is 0 on the grid')
    target = validate_target(g, box, bound_c)
    volume = box.volume

    def run(r):
        stream = substream(seed, r)
        uniform = stream.uniform_box_block(box, n)
        a = volume * float(np.mean(g(uniform)))
        screened = srmc_sample(target, n, stream.next_u64(), threads=1)
        inside = int(np.count_nonzero(region.eval_many(screened.points) == 1.0))
        logger.debug('Replication %d: A = %r, B = %d/%d', r, a, inside, n)
        return a * inside / n, inside

    results = _replicate(run, reps, threads)
    estimate = IntegralEstimate.aggregate([value for value, _ in results], n_uniform=n * reps,
                                          n_screened=n * reps, n_in_region=sum(inside for _, inside in results),
                                          method='screened', bound_c=bound_c,
                                          wall_time_ms=(time.perf_counter() - started) * 1000.0)
    logger.info('Screened estimate %r +/- %r over %d replication(s)', estimate.value, estimate.std_error, reps)
    return estimate


def integrate_direct(g, region, box, n, reps=DEFAULT_REPLICATIONS, seed=0, threads=None):
    """
    Plain Monte Carlo estimate vol(box) * mean(g(u) * region(u)) over uniform draws u.
    Replication r draws from substream(mix(seed ^ DIRECT_STREAM_TAG), r), never from the screened
    estimator's streams.
    ``g`` may take either sign.
    """
    _check_inputs(g, region, box, n, reps)
    started = time.perf_counter()
    volume = box.volume
    direct_seed = splitmix64_mix(int(seed) ^ DIRECT_STREAM_TAG)

    def run(r):
        uniform = substream(direct_seed, r).uniform_box_block(box, n)
        inside = region.eval_many(uniform)
        return volume * float(np.mean(g(uniform) * inside)), int(np.count_nonzero(inside == 1.0))

    results = _replicate(run, reps, threads)
    estimate = IntegralEstimate.aggregate([value for value, _ in results], n_uniform=n * reps, n_screened=0,
                                          n_in_region=sum(inside for _, inside in results), method='direct',
                                          wall_time_ms=(time.perf_counter() - started) * 1000.0)
    logger.info('Direct estimate %r +/- %r over %d replication(s)', estimate.value, estimate.std_error, reps)
    return estimate


@dataclass
class StudyRow(object):
    n: int
    value: float
    std_error: float
    deviation: Optional[float]
    wall_time_ms: float

    def to_dict(self):
        return {
            'n': self.n,
            'value': self.value,
            'std_error': self.std_error,
            'deviation': self.deviation,
            'wall_time_ms': self.wall_time_ms,
        }


def convergence_study(g, region, box, sizes, reps=DEFAULT_REPLICATIONS, seed=0, exact=None, threads=None):
    """
    Screened estimates for each sample size in ``sizes``, with deviation from ``exact`` when known.
    """
    rows = []
    for n in sizes:
        estimate = integrate_screened(g, region, box, n, reps, seed, threads)
        deviation = estimate.value - exact if exact is not None else None
        rows.append(StudyRow(n, estimate.value, estimate.std_error, deviation, estimate.wall_time_ms))
    return rows
