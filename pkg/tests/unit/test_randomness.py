import numpy as np
import pytest

from rmc.model import Box
from rmc.randomness import GOLDEN_GAMMA, MASK64, make_stream, parse_seed, substream
from rmc.stats import chi_square_quantile_999


def test_splitmix64_reference_output():
    assert make_stream(0).next_u64() == 0xE220A8397B1DCDAF


def test_uniform01_range():
    stream = make_stream(1)
    for _ in range(1000):
        u = stream.uniform01()
        assert 0.0 <= u < 1.0


def test_uniform01_is_uniform():
    counts = np.bincount((make_stream(2024).uniform01_block(100000) * 100).astype(int), minlength=100)
    expected = 100000 / 100
    assert np.sum((counts - expected) ** 2 / expected) < chi_square_quantile_999(99)


def test_uniform01_mean():
    assert abs(np.mean(make_stream(99).uniform01_block(10 ** 6)) - 0.5) < 0.002


def test_block_matches_scalar_draws():
    a = make_stream(12345)
    b = make_stream(12345)
    assert a.u64_block(100).tolist() == [b.next_u64() for _ in range(100)]
    assert a == b
    assert a.uniform01_block(10).tolist() == [b.uniform01() for _ in range(10)]


def test_uniform_box_consumes_d_draws():
    box = Box((-5.0, -5.0, 0.0), (5.0, 5.0, 1.0))
    stream = make_stream(7)
    start = stream.state
    point = stream.uniform_box(box)
    assert stream.state == (start + 3 * GOLDEN_GAMMA) & MASK64
    assert all(lo <= v < hi for v, (lo, hi) in zip(point, box.bounds))


def test_uniform_box_block_matches_scalar():
    box = Box((-5.0, -5.0), (5.0, 5.0))
    a = make_stream(99)
    b = make_stream(99)
    block = a.uniform_box_block(box, 50)
    assert [tuple(row) for row in block.tolist()] == [b.uniform_box(box) for _ in range(50)]


def test_skip_and_copy():
    a = make_stream(3)
    b = a.copy()
    a.skip(10)
    for _ in range(10):
        b.next_u64()
    assert a == b


def test_substreams_are_deterministic_and_distinct():
    assert substream(42, 0) == substream(42, 0)
    firsts = {substream(42, k).next_u64() for k in range(100)}
    assert len(firsts) == 100
    assert substream(42, 0).next_u64() != make_stream(42).next_u64()


def test_parse_seed():
    assert parse_seed('17') == 17
    assert parse_seed('0x10') == 16
    assert parse_seed('0xFFFFFFFFFFFFFFFF') == MASK64
    with pytest.raises(ValueError):
        parse_seed('0x1FFFFFFFFFFFFFFFF')
