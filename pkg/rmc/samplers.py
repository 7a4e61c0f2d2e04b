# -*- coding: utf-8 -*-
"""
Rejection samplers.

Both samplers split the requested count into chunks of CHUNK_SIZE acceptances. Chunk k
draws from ``substream(seed, k)`` and chunks are concatenated in chunk order, so the output
is a pure function of (target, n, seed) whatever the number of worker threads.

Proposals are drawn in vectorised blocks but consumed exactly as the sequential algorithm
would: the stream is rewound to just after the proposal that produced the last needed
acceptance.
"""
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import BudgetExhausted, ClientException
from .model import MAX_CELLS, RunMetadata, SampleBatch, grid_points
from .randomness import substream
from .util import worker_count

logger = logging.getLogger(__name__)

CHUNK_SIZE = 4096
REPORT_EVERY = 2 ** 16
MAX_BLOCK = 2 ** 16
MIN_BLOCK = 256
MIN_BUDGET = 10 ** 4
BUDGET_FACTOR = 1000
MIN_RATE = 1e-6


def default_grid(dims):
    """Largest per-dimension grid (odd for d <= 2) whose total size stays within 2^22 points."""
    if dims == 1:
        return 1025
    if dims == 2:
        return 257
    size = int(round(MAX_CELLS ** (1.0 / dims)))
    while size ** dims > MAX_CELLS:
        size -= 1
    return max(size, 2)


def grid_maximum(field, box, grid_per_dim):
    """
    Maximum of ``field`` over a regular grid including the box corners.
    :return: (maximum, point at which it is attained)
    """
    if isinstance(grid_per_dim, int):
        grid_per_dim = (grid_per_dim,) * box.dims
    grid = tuple(int(g) for g in grid_per_dim)
    if len(grid) != box.dims or any(g < 2 for g in grid):
        raise ClientException('grid needs at least 2 points per dimension, got {}'.format(list(grid)))
    if math.prod(grid) > MAX_CELLS:
        raise ClientException('grid of {} points exceeds the limit of {}'.format(math.prod(grid), MAX_CELLS))
    points = grid_points(box.axes(grid))
    values = field(points)
    index = int(np.argmax(values))
    return float(values[index]), tuple(points[index].tolist())


def estimate_bound(field, box, grid_per_dim, safety=1.0):
    """
    Envelope constant c = safety * (grid maximum of f). Deterministic.
    """
    if safety < 1:
        raise ClientException('safety factor must be >= 1, got {!r}'.format(safety))
    maximum, _ = grid_maximum(field, box, grid_per_dim)
    return safety * maximum


class _Progress(object):
    """Run-wide proposal and acceptance counters shared by the chunk workers."""

    def __init__(self, n, observer=None, min_budget=MIN_BUDGET, budget_factor=BUDGET_FACTOR):
        self.n = n
        self.observer = observer
        self.min_budget = min_budget
        self.budget_factor = budget_factor
        self.proposals = 0
        self.accepted = 0
        self.error = None
        self.lock = threading.Lock()

    def rate(self):
        with self.lock:
            return self.accepted / self.proposals if self.proposals else 0.0

    @property
    def stopped(self):
        return self.error is not None

    def budget(self):
        rate = self.accepted / self.proposals if self.proposals else 0.0
        return max(self.min_budget, self.budget_factor * self.n / max(rate, MIN_RATE))

    def add(self, proposals, accepted):
        with self.lock:
            if self.error is not None:
                return False
            before = self.proposals // REPORT_EVERY
            self.proposals += proposals
            self.accepted += accepted
            budget = self.budget()
            if self.proposals > budget:
                if self.observer:
                    self.observer(self.proposals, self.accepted)
                self.error = BudgetExhausted(self.proposals, self.accepted, int(budget))
                return False
            if self.observer and self.proposals // REPORT_EVERY > before:
                self.observer(self.proposals, self.accepted)
            return True


def _block_size(need, rate):
    return int(min(MAX_BLOCK, max(MIN_BLOCK, math.ceil(1.1 * need / rate) + 16)))


def _run_chunk(count, stream, draws_per_proposal, propose, progress):
    """
    Drives one chunk: ``propose(u)`` maps a (m, draws_per_proposal) block of uniforms to
    (points, accept mask). Returns the accepted points and the proposals consumed.
    """
    accepted_blocks = []
    accepted = 0
    proposed = 0
    while accepted < count:
        rate = accepted / proposed if accepted else progress.rate() or 1.0 / 64
        m = _block_size(count - accepted, rate)
        start = stream.state
        u = stream.uniform01_block(m * draws_per_proposal).reshape(m, draws_per_proposal)
        points, accept = propose(u)
        hits = np.flatnonzero(accept)
        need = count - accepted
        if len(hits) >= need:
            consumed = int(hits[need - 1]) + 1
            hits = hits[:need]
            stream.state = start
            stream.skip(consumed * draws_per_proposal)
        else:
            consumed = m
        accepted_blocks.append(points[hits])
        accepted += len(hits)
        proposed += consumed
        if not progress.add(consumed, len(hits)):
            return None, proposed
    return np.concatenate(accepted_blocks, axis=0), proposed


def _chunk_sizes(n):
    sizes = [CHUNK_SIZE] * (n // CHUNK_SIZE)
    if n % CHUNK_SIZE:
        sizes.append(n % CHUNK_SIZE)
    return sizes


def _sample(n, seed, dims, draws_per_proposal, propose, bound_c, observer, threads, budget):
    if n < 1:
        raise ClientException('n must be >= 1, got {}'.format(n))
    started = time.perf_counter()
    progress = _Progress(n, observer, *budget)
    sizes = _chunk_sizes(n)
    threads = min(threads or worker_count(), len(sizes))
    logger.debug('Sampling %d points in %d chunk(s) on %d thread(s)', n, len(sizes), threads)

    def work(chunk):
        return _run_chunk(sizes[chunk], substream(seed, chunk), draws_per_proposal, propose, progress)

    if threads <= 1:
        results = []
        for chunk in range(len(sizes)):
            results.append(work(chunk))
            if progress.stopped:
                break
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(work, range(len(sizes))))

    if progress.error is not None:
        raise progress.error

    points = np.concatenate([r[0] for r in results], axis=0).reshape(-1, dims)
    meta = RunMetadata(seed=seed, requested_n=n, proposals_drawn=sum(r[1] for r in results), accepted=n,
                       bound_c=float(bound_c), wall_time_ms=(time.perf_counter() - started) * 1000.0)
    logger.info('Accepted %d of %d proposals (rate %.4f) in %.1f ms', meta.accepted, meta.proposals_drawn,
                meta.acceptance_rate, meta.wall_time_ms)
    return SampleBatch(points, meta)


def srmc_sample(target, n, seed, observer=None, threads=None, budget=(MIN_BUDGET, BUDGET_FACTOR)):
    """
    Simple rejection sampling with a uniform proposal on the support box.

    Each proposal draws x uniformly on the box (d draws) and y = c * uniform01 (one draw),
    and x is accepted iff f(x) > y.

    :param target: validated TargetSpec
    :param n: number of acceptances, >= 1
    :param seed: 64-bit seed; chunk k uses substream(seed, k)
    :param observer: optional callable(proposals_drawn, accepted), invoked every 2^16 proposals
    :param threads: worker threads, default from RMC_THREADS
    :param budget: (minimum proposals, factor) of the proposal budget
    :raises BudgetExhausted: when proposals exceed max(minimum, factor * n / running rate)
    """
    field = target.field
    dims = target.dims
    lower = target.support.lower_array
    widths = target.support.widths
    bound_c = target.bound_c

    def propose(u):
        points = lower + u[:, :dims] * widths
        return points, field(points) > bound_c * u[:, dims]

    return _sample(n, seed, dims, dims + 1, propose, bound_c, observer, threads, budget)


def grmc_sample(field, proposal, n, seed, observer=None, threads=None, budget=(MIN_BUDGET, BUDGET_FACTOR)):
    """
    Rejection sampling with a piecewise-uniform proposal.

    Each proposal picks cell k with probability m_k / M (one draw, skipped when a single cell
    is active), draws x uniformly in the cell (d draws) and y = uniform01 (one draw), and x is
    accepted iff f(x) > h_k * y. With a single cell this is srmc_sample with c = h_0.
    """
    dims = proposal.box.dims
    active = np.flatnonzero(proposal.heights > 0)
    single = len(active) == 1
    offset = 0 if single else 1

    def propose(u):
        if single:
            cells = np.full(u.shape[0], active[0])
        else:
            cells = proposal.select(u[:, 0])
        lower, widths = proposal.cell_bounds(cells)
        points = lower + u[:, offset:offset + dims] * widths
        return points, field(points) > proposal.heights[cells] * u[:, offset + dims]

    return _sample(n, seed, dims, dims + 1 + offset, propose, float(np.max(proposal.heights)), observer,
                   threads, budget)


@dataclass
class ProposalTrace(object):
    """Proposals of the uniform sampler with their paired heights and accept decisions."""
    points: np.ndarray
    heights: np.ndarray
    accepted: np.ndarray


def principle_trace(target, n_proposals, seed):
    """
    The first ``n_proposals`` proposals srmc_sample makes for ``seed``: points, paired
    y = c * u and accept flags. Accepted points are a prefix of srmc_sample's output.
    """
    dims = target.dims
    u = substream(seed, 0).uniform01_block(n_proposals * (dims + 1)).reshape(n_proposals, dims + 1)
    points = target.support.lower_array + u[:, :dims] * target.support.widths
    heights = target.bound_c * u[:, dims]
    return ProposalTrace(points, heights, target.field(points) > heights)
