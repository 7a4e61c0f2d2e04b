# -*- coding: utf-8 -*-
"""
Seedable splitmix64 streams.

A stream's n-th output is ``mix(seed + n * GOLDEN_GAMMA)``, so a block of draws can be
produced with numpy in one go and still match the one-at-a-time sequence bit for bit.
"""
import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB

TWO_POW_MINUS_53 = 2.0 ** -53


def splitmix64_mix(z):
    """Finalizer of splitmix64 on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_2) & MASK64
    return z ^ (z >> 31)


def _mix_array(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_2)
    return z ^ (z >> np.uint64(31))


def parse_seed(text):
    """Accepts a decimal or 0x-prefixed 64-bit unsigned seed."""
    text = str(text).strip()
    value = int(text, 16) if text.lower().startswith('0x') else int(text, 10)
    if not 0 <= value <= MASK64:
        raise ValueError('seed must be a 64-bit unsigned integer: {}'.format(text))
    return value


class RandomStream(object):
    """
    A single-owner splitmix64 generator. Advancing ``state`` is its only mutation.
    """

    __slots__ = ('state',)

    def __init__(self, seed=0):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return splitmix64_mix(self.state)

    def uniform01(self):
        """A double in [0, 1) from the top 53 bits of one draw."""
        return (self.next_u64() >> 11) * TWO_POW_MINUS_53

    def uniform_box(self, box):
        """One point of ``box``; consumes exactly ``box.dims`` draws in dimension order."""
        return tuple(lo + self.uniform01() * (hi - lo) for lo, hi in zip(box.lower, box.upper))

    def u64_block(self, count):
        """The next ``count`` raw outputs as a uint64 array."""
        steps = np.arange(1, count + 1, dtype=np.uint64) * np.uint64(GOLDEN_GAMMA)
        states = steps + np.uint64(self.state)
        self.state = (self.state + count * GOLDEN_GAMMA) & MASK64
        return _mix_array(states)

    def uniform01_block(self, count):
        """The next ``count`` uniform01 values, identical to calling uniform01 ``count`` times."""
        return (self.u64_block(count) >> np.uint64(11)).astype(np.float64) * TWO_POW_MINUS_53

    def uniform_box_block(self, box, count):
        """``count`` points of ``box`` as a (count, d) array, laid out as repeated uniform_box calls."""
        u = self.uniform01_block(count * box.dims).reshape(count, box.dims)
        return box.lower_array + u * box.widths

    def skip(self, count):
        self.state = (self.state + count * GOLDEN_GAMMA) & MASK64

    def copy(self):
        return RandomStream(self.state)

    def __eq__(self, other):
        return isinstance(other, RandomStream) and other.state == self.state

    def __repr__(self):
        return 'RandomStream(0x{:016X})'.format(self.state)


def make_stream(seed):
    return RandomStream(seed)


def substream(seed, chunk):
    """Stream for work item ``chunk``; a pure function of (seed, chunk)."""
    return RandomStream(splitmix64_mix(int(seed) ^ ((GOLDEN_GAMMA * (int(chunk) + 1)) & MASK64)))
