import math

from hypothesis import given, strategies as st
import numpy as np
import pytest

from anderson_bernoulli import rng

# First outputs of the reference C SplitMix64 generator seeded with 1234567.
REFERENCE_1234567 = [6457827717110365317, 3203168211198807973, 9817491932198370423,
                     4593380528125082431, 16408922859458223821]


def test_reference_vector():
    gen = rng.splitmix64(1234567)
    assert [next(gen) for _ in range(5)] == REFERENCE_1234567


def test_output_is_counter_addressable():
    assert [rng.output(1234567, n) for n in range(1, 6)] == REFERENCE_1234567


def test_stream_key_is_first_outputs():
    assert rng.stream_key(1234567, 0) == REFERENCE_1234567[0]
    assert rng.stream_key(1234567, 4) == REFERENCE_1234567[4]
    with pytest.raises(ValueError):
        rng.stream_key(1, -1)


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_uniform_range(key, n):
    u = rng.uniform(key, n)
    assert 0.0 <= u < 1.0


def test_bernoulli_threshold_edges():
    assert rng.bernoulli_threshold(0.0) == 0
    assert rng.bernoulli_threshold(1.0) == 2**53
    assert rng.bernoulli_threshold(0.5) == 2**52
    with pytest.raises(ValueError):
        rng.bernoulli_threshold(1.5)


@pytest.mark.parametrize("q", [0.0, 0.3, 0.5, 1.0])
def test_compiled_occupancy_matches_reference(q):
    key = rng.stream_key(99, 3)
    thr = rng.bernoulli_threshold(q)
    occ = rng.occupancy(key, thr, 500)
    ref = [(rng.output(key, x) >> 11) < thr for x in range(1, 501)]
    assert occ.tolist() == ref


def test_compiled_geometric_matches_reference():
    key, p = rng.stream_key(5, 0), 0.37
    got = rng.geometric(key, p, 200)
    ref = []
    for n in range(1, 201):
        u = ((rng.output(key, n) >> 11) + 1) * 2.0**-53
        ref.append(1 + math.floor(math.log(u) / math.log(p)))
    assert got.tolist() == ref


def test_geometric_strided_layout():
    key = rng.stream_key(5, 1)
    both = rng.geometric(key, 0.5, 400)
    odd = rng.geometric(key, 0.5, 200, first=1, step=2)
    even = rng.geometric(key, 0.5, 200, first=2, step=2)
    assert np.array_equal(odd, both[0::2])
    assert np.array_equal(even, both[1::2])


def test_geometric_max_matches_materialized():
    key = rng.stream_key(11, 2)
    assert rng.geometric_max(key, 0.6, 5000) == rng.geometric(key, 0.6, 5000).max()


def test_geometric_moments():
    p = 0.5
    k = rng.geometric(rng.stream_key(1, 0), p, 10**6)
    assert k.min() >= 1
    # mean 1/(1-p) = 2, sd sqrt(p)/(1-p)
    assert abs(k.mean() - 2.0) < 5 * math.sqrt(p) / (1 - p) / 1000
