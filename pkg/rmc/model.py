# -*- coding: utf-8 -*-
"""
Supports, targets, proposals and the records samplers produce.
"""
import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Optional, Tuple

import numpy as np

from .exceptions import ClientException, EnvelopeViolation, SamplingException
from .expression import ExprAst, VarOrder, parse
from .randomness import make_stream

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 1.2
BOUND_SAFETY = 1.0
VALIDATION_PROBES = 1000
PROBE_SEED = 0x5EED0F0CAFE
MAX_CELLS = 2 ** 22
SLAB_POINTS = 2 ** 20
MAX_ROW_POINTS = 2 ** 24
REFINEMENT = 8
TRUNCATION_WARNING = 1e-3


@dataclass(frozen=True)
class Box(object):
    """Axis-aligned hyper-rectangle [lower_i, upper_i) in variable order."""
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)
        if not lower or len(lower) != len(upper):
            raise SamplingException(preset=SamplingException.Preset.INVALID_BOX,
                                    data='lower and upper bounds must be nonempty and of equal length')
        for i, (lo, hi) in enumerate(zip(lower, upper)):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise SamplingException(preset=SamplingException.Preset.INVALID_BOX,
                                        data='dimension {}: {!r}:{!r}'.format(i, lo, hi))
        volume = self.volume
        if not (math.isfinite(volume) and volume > 0):
            raise SamplingException(preset=SamplingException.Preset.INVALID_BOX,
                                    data='volume {!r} is not finite and positive'.format(volume))

    @classmethod
    def from_bounds(cls, bounds):
        bounds = list(bounds)
        return cls(tuple(lo for lo, _ in bounds), tuple(hi for _, hi in bounds))

    @property
    def dims(self):
        return len(self.lower)

    @property
    def bounds(self):
        return list(zip(self.lower, self.upper))

    @property
    def volume(self):
        return math.prod(hi - lo for lo, hi in zip(self.lower, self.upper))

    @property
    def lower_array(self):
        return np.array(self.lower, dtype=np.float64)

    @property
    def upper_array(self):
        return np.array(self.upper, dtype=np.float64)

    @property
    def widths(self):
        return self.upper_array - self.lower_array

    def contains(self, points):
        """Row-wise membership of the half-open box."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, self.dims)
        return np.all((points >= self.lower_array) & (points < self.upper_array), axis=1)

    def axes(self, points_per_dim):
        """Regular grid axes including the box corners."""
        return [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.bounds, points_per_dim)]

    def __str__(self):
        return ','.join('{!r}:{!r}'.format(lo, hi) for lo, hi in self.bounds)


def parse_box(text):
    """
    Parses "lo:hi,lo:hi,..." with one pair per dimension in variable order.

    Bounds may be constant expressions such as "pi/4:3*pi/4".
    """
    if text is None or not text.strip():
        raise ClientException('box must be given as "lo:hi,lo:hi,..."')
    bounds = []
    for pair in text.split(','):
        parts = pair.split(':')
        if len(parts) != 2:
            raise ClientException('box dimension "{}" is not of the form lo:hi'.format(pair.strip()))
        bounds.append(tuple(parse(part).eval() for part in parts))
    return Box.from_bounds(bounds)


def grid_points(axes):
    """Cartesian product of axes as an (N, d) array, first axis slowest."""
    mesh = np.meshgrid(*axes, indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class ScalarField(object):
    """A real-valued expression over an ordered set of variables."""
    expr: ExprAst

    def __post_init__(self):
        if self.expr.vars.dims < 1:
            raise ClientException('a scalar field needs at least one variable')

    @classmethod
    def parse(cls, text, vars):
        if not isinstance(vars, VarOrder):
            vars = VarOrder.parse(vars) if isinstance(vars, str) else VarOrder(tuple(vars))
        return cls(parse(text, vars))

    @property
    def vars(self):
        return self.expr.vars

    @property
    def dims(self):
        return self.expr.vars.dims

    def __call__(self, points):
        return self.expr.eval_many(points)

    def value(self, point):
        return self.expr.eval(point)

    def __str__(self):
        return str(self.expr)


@dataclass(frozen=True)
class TargetSpec(object):
    """Everything the uniform-proposal sampler consumes: f, its support box and c >= max f."""
    field: ScalarField
    support: Box
    bound_c: float
    truncation_mass: Optional[float] = None

    def __post_init__(self):
        if self.field.dims != self.support.dims:
            raise ClientException('{} variables but a {}-dimensional box'.format(self.field.dims, self.support.dims))
        if not (math.isfinite(self.bound_c) and self.bound_c > 0):
            raise ClientException('envelope constant must be finite and positive, got {!r}'.format(self.bound_c))

    @property
    def dims(self):
        return self.support.dims


def probe_points(box, count=VALIDATION_PROBES, seed=PROBE_SEED):
    return make_stream(seed).uniform_box_block(box, count)


def check_nonnegative(values, points):
    negative = values < 0
    if np.any(negative):
        index = int(np.flatnonzero(negative)[0])
        raise SamplingException(preset=SamplingException.Preset.NEGATIVE_DENSITY,
                                data='f{} = {!r}'.format(tuple(points[index].tolist()), float(values[index])))


def check_envelope(values, points, bound_c):
    violated = values > bound_c
    if np.any(violated):
        index = int(np.argmax(np.where(violated, values, -np.inf)))
        raise EnvelopeViolation(points[index], values[index], bound_c)


def estimate_truncation_mass(field, box, n=100000, seed=PROBE_SEED):
    """
    Plain-MC estimate of the mass of a normalised density lying outside ``box``.
    """
    points = make_stream(seed).uniform_box_block(box, n)
    return 1.0 - box.volume * float(np.mean(field(points)))


def validate_target(field, box, bound_c=None, check_truncation=False, grid_per_dim=None, safety=BOUND_SAFETY):
    """
    Checks that ``field`` is a usable density on ``box`` and that ``bound_c`` dominates it.

    :param bound_c: envelope constant; estimated from a grid when None
    :param safety: factor on the estimated maximum; the estimate never falls below the probed values
    :param check_truncation: also estimate the mass outside the box and warn when it is not negligible
    :raises EnvelopeViolation: reporting the probe point and f-value
    :raises SamplingException: for negative densities
    :raises EvaluationError: for domain faults
    """
    if field.dims != box.dims:
        raise ClientException('{} variables but a {}-dimensional box'.format(field.dims, box.dims))

    points = probe_points(box)
    values = field(points)
    check_nonnegative(values, points)

    if bound_c is None:
        from .samplers import default_grid, estimate_bound
        bound_c = max(estimate_bound(field, box, grid_per_dim or default_grid(box.dims), safety),
                      float(np.max(values)))
        logger.info('Estimated envelope constant c = %r', bound_c)
        if bound_c <= 0:
            raise SamplingException(preset=SamplingException.Preset.ZERO_MASS, data='grid maximum is 0')

    bound_c = float(bound_c)
    check_envelope(values, points, bound_c)
    probe_max = float(np.max(values))
    if probe_max > 0 and bound_c > 10 * probe_max:
        logger.warning('Envelope c = %r is more than ten times the probed maximum %r; expect a low acceptance rate',
                       bound_c, probe_max)

    truncation = None
    if check_truncation:
        truncation = estimate_truncation_mass(field, box)
        if truncation > TRUNCATION_WARNING:
            logger.warning('Estimated truncation mass outside the box is %.3g; sampling the renormalised truncation',
                           truncation)
        else:
            logger.info('Estimated truncation mass outside the box is %.3g', truncation)

    return TargetSpec(field, box, bound_c, truncation)


def _cell_maxima(values, bins, refine):
    """Max over each cell's (refine + 1)^d grid points, edges shared with neighbours."""
    for axis, count in enumerate(bins):
        moved = np.moveaxis(values, axis, 0)
        head = moved[:refine * count].reshape((count, refine) + moved.shape[1:]).max(axis=1)
        tail = moved[refine::refine]
        values = np.moveaxis(np.maximum(head, tail), 0, axis)
    return values


@dataclass(frozen=True, eq=False)
class PiecewiseUniformProposal(object):
    """
    A histogram-shaped envelope: constant height h_k on every cell of a regular partition.

    Cells are numbered in row-major order (last variable fastest).
    """
    box: Box
    bins: Tuple[int, ...]
    heights: np.ndarray
    edges: tuple = dataclass_field(repr=False)
    cumulative: np.ndarray = dataclass_field(repr=False)

    @classmethod
    def from_heights(cls, box, bins, heights):
        bins = tuple(int(b) for b in bins)
        heights = np.asarray(heights, dtype=np.float64).reshape(-1)
        if heights.size != math.prod(bins):
            raise ClientException('{} heights for {} cells'.format(heights.size, math.prod(bins)))
        edges = tuple(np.linspace(lo, hi, b + 1) for (lo, hi), b in zip(box.bounds, bins))
        cumulative = np.cumsum(heights * (box.volume / math.prod(bins)))
        return cls(box, bins, heights, edges, cumulative)

    @property
    def cell_count(self):
        return len(self.heights)

    @property
    def cell_volume(self):
        return self.box.volume / self.cell_count

    @property
    def masses(self):
        return self.heights * self.cell_volume

    @property
    def total_mass(self):
        return float(self.cumulative[-1])

    @property
    def active_cells(self):
        return int(np.count_nonzero(self.heights > 0))

    def cell_bounds(self, cells):
        """Lower corners and widths of the given flat cell indices, each (len(cells), d)."""
        index = np.unravel_index(np.asarray(cells), self.bins)
        lower = np.stack([e[i] for e, i in zip(self.edges, index)], axis=-1)
        upper = np.stack([e[i + 1] for e, i in zip(self.edges, index)], axis=-1)
        return lower, upper - lower

    def cell_of(self, points):
        points = np.asarray(points, dtype=np.float64).reshape(-1, self.box.dims)
        index = [np.clip(np.searchsorted(e, points[:, i], side='right') - 1, 0, b - 1)
                 for i, (e, b) in enumerate(zip(self.edges, self.bins))]
        return np.ravel_multi_index(index, self.bins)

    def height_at(self, points):
        return self.heights[self.cell_of(points)]

    def select(self, u):
        """Inverse-CDF cell choice for uniforms ``u`` over the cumulative mass table."""
        cells = np.searchsorted(self.cumulative, u * self.total_mass, side='right')
        return np.minimum(cells, self.cell_count - 1)


def build_piecewise_proposal(field, box, bins_per_dim, safety=SAFETY_FACTOR, refine=REFINEMENT):
    """
    Builds a piecewise-uniform envelope: h_k is ``safety`` times the maximum of f over an
    ``refine``^d refinement of cell k. Cells whose grid maximum is 0 get h_k = 0 and are never proposed.
    """
    if field.dims != box.dims:
        raise ClientException('{} variables but a {}-dimensional box'.format(field.dims, box.dims))
    if isinstance(bins_per_dim, int):
        bins_per_dim = (bins_per_dim,) * box.dims
    bins = tuple(int(b) for b in bins_per_dim)
    if len(bins) != box.dims or any(b < 1 for b in bins):
        raise ClientException('need one bin count >= 1 per dimension, got {}'.format(list(bins)))
    if math.prod(bins) > MAX_CELLS:
        raise ClientException('{} cells exceeds the limit of {}'.format(math.prod(bins), MAX_CELLS))
    shape = tuple(refine * b + 1 for b in bins)
    axes = box.axes(shape)
    plane = math.prod(shape[1:])
    if (refine + 1) * plane > MAX_ROW_POINTS:
        raise ClientException('one row of cells needs {} refinement points, more than the limit of {}'.format(
            (refine + 1) * plane, MAX_ROW_POINTS))

    # slabs of whole cell rows along the first axis; neighbouring slabs share an edge plane
    rows = max(1, (SLAB_POINTS // plane - 1) // refine)
    maxima = []
    for start in range(0, bins[0], rows):
        stop = min(start + rows, bins[0])
        slab = (axes[0][start * refine:stop * refine + 1],) + tuple(axes[1:])
        points = grid_points(slab)
        values = field(points)
        check_nonnegative(values, points)
        slab_shape = (len(slab[0]),) + shape[1:]
        maxima.append(_cell_maxima(values.reshape(slab_shape), (stop - start,) + bins[1:], refine).reshape(-1))
    heights = safety * np.concatenate(maxima)

    proposal = PiecewiseUniformProposal.from_heights(box, bins, heights)
    if proposal.total_mass <= 0:
        raise SamplingException(preset=SamplingException.Preset.ZERO_MASS,
                                data='every cell has grid maximum 0')
    logger.debug('Piecewise proposal: %d cells (%d active), total mass %r',
                 proposal.cell_count, proposal.active_cells, proposal.total_mass)
    return proposal


@dataclass
class RunMetadata(object):
    seed: int
    requested_n: int
    proposals_drawn: int
    accepted: int
    bound_c: float
    wall_time_ms: float = 0.0

    @property
    def acceptance_rate(self):
        return self.accepted / self.proposals_drawn if self.proposals_drawn else 0.0

    def to_dict(self):
        return {
            'seed': self.seed,
            'requested_n': self.requested_n,
            'proposals_drawn': self.proposals_drawn,
            'accepted': self.accepted,
            'acceptance_rate': self.acceptance_rate,
            'bound_c': self.bound_c,
            'wall_time_ms': self.wall_time_ms,
        }


@dataclass
class SampleBatch(object):
    """Accepted draws in acceptance order, one row per draw."""
    points: np.ndarray
    meta: RunMetadata

    @property
    def dims(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]
