import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rrtperc.rng import RngStream, as_generator, split

u64 = st.integers(0, 2**64 - 1)


@given(u64, u64)
def test_same_stream_same_draws(seed, sid):
    a = RngStream(seed, sid).generator().random(5)
    b = RngStream(seed, sid).generator().random(5)
    assert np.array_equal(a, b)


def test_distinct_stream_ids_differ():
    a = RngStream(1, 0).generator().random(8)
    b = RngStream(1, 1).generator().random(8)
    assert not np.array_equal(a, b)


def test_replicate_offsets_stream_id():
    base = RngStream(3, 10, (2,))
    assert base.replicate(5) == RngStream(3, 15, (2,))


def test_substreams_are_distinct_from_parent():
    base = RngStream(3)
    draws = {tuple(s.generator().random(3)) for s in (base, base.substream(0), base.substream(1))}
    assert len(draws) == 3


@pytest.mark.parametrize("bad", [(-1, 0), (0, -1), (2**64, 0)])
def test_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        RngStream(*bad)


def test_as_generator_passes_generators_through():
    g = np.random.default_rng(0)
    assert as_generator(g) is g
    with pytest.raises(TypeError):
        as_generator("seed")


def test_split_is_reproducible_for_streams():
    a = [g.random() for g in split(RngStream(9), 3)]
    b = [g.random() for g in split(RngStream(9), 3)]
    assert a == b and len(set(a)) == 3


def test_independent_streams_are_uncorrelated():
    x = RngStream(0, 0).generator().random(50_000)
    y = RngStream(0, 1).generator().random(50_000)
    r = np.corrcoef(x, y)[0, 1]
    assert abs(r) < 4 / np.sqrt(x.size)
