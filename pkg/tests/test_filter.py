import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpbloom import BloomFilter, DomainError, FilterParams, bloom_init, bloom_query, hash_index
from dpbloom.hashing import GOLDEN, MASK64, element_key, mix64, mix64_array, position, positions_array, token_to_element


def test_mix64_matches_splitmix64_stream():
    # first two outputs of the reference splitmix64 generator seeded with 0
    expected = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4]
    states = [GOLDEN, (2 * GOLDEN) & MASK64]
    assert [mix64(s) for s in states] == expected
    states = np.array(states, dtype=np.uint64)
    assert mix64_array(states).tolist() == expected


def test_scalar_and_vector_positions_agree():
    rng = np.random.default_rng(0)
    xs = rng.integers(0, 2**63, size=200, dtype=np.uint64)
    seed = 0xDEADBEEF
    vec = positions_array(seed, xs, 7, 1000)
    for row, x in zip(vec, xs):
        key = element_key(seed, int(x))
        assert row.tolist() == [position(key, i, 1000) for i in range(7)]


def test_params_validation():
    with pytest.raises(DomainError):
        FilterParams(1, 3)
    with pytest.raises(DomainError):
        FilterParams(16, 0)
    with pytest.raises(DomainError):
        FilterParams(16, 65)
    with pytest.raises(DomainError):
        FilterParams(16, 2, n=0)
    with pytest.raises(DomainError):
        FilterParams(16, 2, seed=-1)


def test_hash_index_deterministic_and_in_range():
    p = FilterParams(97, 5, 1000, seed=11)
    for x in range(0, 1000, 37):
        for i in range(5):
            h = hash_index(p, i, x)
            assert h == hash_index(p, i, x)
            assert 0 <= h < 97


def test_hash_index_rejects_out_of_range():
    p = FilterParams(8, 2, 10)
    with pytest.raises(DomainError):
        hash_index(p, 2, 0)
    with pytest.raises(DomainError):
        hash_index(p, 0, 10)


def test_hash_index_uniform_over_buckets():
    m = 8
    xs = np.arange(10**6, dtype=np.uint64)
    idx = positions_array(12345, xs, 1, m)[:, 0]
    counts = np.bincount(idx, minlength=m)
    expected = xs.size / m
    sigma = math.sqrt(xs.size * (1 / m) * (1 - 1 / m))
    assert np.all(np.abs(counts - expected) <= 3 * sigma), counts


def test_distinct_seeds_give_different_indices():
    a = FilterParams(1 << 20, 1, seed=1)
    b = FilterParams(1 << 20, 1, seed=2)
    assert any(hash_index(a, 0, x) != hash_index(b, 0, x) for x in range(100))


def test_hashes_of_one_element_can_collide():
    # positions are drawn with replacement, so |Y| < k occurs at the model rate
    m, k = 4, 2
    idx = positions_array(99, np.arange(200_000, dtype=np.uint64), k, m)
    rate = np.mean(idx[:, 0] == idx[:, 1])
    sigma = math.sqrt(0.25 * 0.75 / 200_000)
    assert abs(rate - 1 / m) <= 3 * sigma


def test_empty_dataset():
    f = bloom_init([], FilterParams(64, 3))
    assert f.popcount() == 0 and f.inserted_count == 0
    assert not bloom_query(f, 5)


def test_single_element_bits():
    p = FilterParams(64, 2, seed=3)
    f = bloom_init({42}, p)
    expected = {hash_index(p, 0, 42), hash_index(p, 1, 42)}
    assert set(np.nonzero(f.bits)[0].tolist()) == expected
    assert bloom_query(f, 42)


def test_duplicates_counted_once():
    p = FilterParams(64, 3)
    f = bloom_init([5, 5, 7, 7, 7], p)
    assert f.inserted_count == 2
    assert f == bloom_init([5, 7], p)


def test_element_outside_universe():
    p = FilterParams(64, 3, n=100)
    with pytest.raises(DomainError):
        bloom_init([100], p)
    f = bloom_init([1], p)
    with pytest.raises(DomainError):
        bloom_query(f, 100)
    with pytest.raises(DomainError):
        bloom_init([-1], p)
    with pytest.raises(DomainError):
        bloom_init(["x"], p)


def test_filter_is_immutable():
    f = bloom_init([1, 2], FilterParams(32, 2))
    with pytest.raises(AttributeError):
        f.inserted_count = 5
    with pytest.raises(ValueError):
        f.bits[0] = True


def test_zero_fraction_matches_occupancy():
    # expected zero fraction (1 - 1/m)^(|A| k); sigma from 200 independent filters
    m, k, a = 1024, 4, 100
    rng = np.random.default_rng(5)
    fracs = []
    for _ in range(200):
        p = FilterParams(m, k, seed=int(rng.integers(0, 2**63)))
        data = rng.choice(1 << 32, a, replace=False)
        fracs.append(1 - bloom_init(data, p).popcount() / m)
    expected = (1 - 1 / m) ** (a * k)
    assert expected == pytest.approx(0.67650, abs=1e-5)
    # per-filter zero count variance is below binomial; binomial sigma is conservative
    sigma = math.sqrt(expected * (1 - expected) / (m * len(fracs)))
    assert abs(np.mean(fracs) - expected) <= 3 * sigma


def test_query_many_matches_scalar_query():
    p = FilterParams(256, 4, seed=9)
    f = bloom_init(range(0, 300, 7), p)
    ys = list(range(500))
    assert f.query_many(ys).tolist() == [bloom_query(f, y) for y in ys]


@settings(max_examples=60, deadline=None)
@given(
    st.sets(st.integers(0, 10**6), max_size=60),
    st.integers(2, 300),
    st.integers(1, 8),
    st.integers(0, 2**64 - 1),
)
def test_no_false_negatives(data, m, k, seed):
    f = bloom_init(data, FilterParams(m, k, 10**6 + 1, seed))
    assert all(bloom_query(f, x) for x in data)
    assert f.popcount() <= min(m, len(data) * k)


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(0, 5000), max_size=40), st.sets(st.integers(0, 5000), max_size=40), st.integers(0, 2**32))
def test_monotone_in_dataset(a, extra, seed):
    p = FilterParams(128, 3, 5001, seed)
    small = bloom_init(a, p)
    big = bloom_init(a | extra, p)
    assert not (small.bits & ~big.bits).any()
    for y in range(0, 5001, 97):
        if bloom_query(small, y):
            assert bloom_query(big, y)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 999), max_size=50), st.randoms())
def test_init_depends_only_on_the_set(items, rnd):
    p = FilterParams(200, 5, 1000, 77)
    shuffled = list(items)
    rnd.shuffle(shuffled)
    assert bloom_init(items, p) == bloom_init(shuffled + items, p)


def test_token_mapping_is_stable_and_in_range():
    assert token_to_element("alice", 1000) == token_to_element("alice", 1000)
    assert token_to_element("alice", 1 << 40) != token_to_element("bob", 1 << 40)
    assert all(0 <= token_to_element(t, 17) < 17 for t in ["", "a", "long token " * 5])


def test_repr_and_equality():
    p = FilterParams(32, 2)
    f = bloom_init([1], p)
    assert "m=32" in repr(f)
    assert f != bloom_init([2], p)
    assert isinstance(f, BloomFilter)
