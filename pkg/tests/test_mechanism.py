import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpbloom import (
    DomainError,
    FilterParams,
    PrivacyBudget,
    PrivateBloomFilter,
    bloom_init,
    derive_budget,
    dist_W,
    fixed_budget,
    private_query,
    privatize,
    quantile_N,
)
from dpbloom.mechanism import flip_generator, randomized_response, response_probabilities


def _filter(m=1024, k=4, size=100, seed=0):
    rng = np.random.default_rng(seed)
    return bloom_init(rng.choice(1 << 32, size, replace=False), FilterParams(m, k, seed=seed))


def test_response_probabilities():
    keep, flip = response_probabilities(math.log(3))
    assert keep == pytest.approx(0.75) and flip == pytest.approx(0.25)
    assert response_probabilities(0.0) == (0.5, 0.5)
    assert response_probabilities(math.inf) == (1.0, 0.0)
    with pytest.raises(DomainError):
        response_probabilities(-0.1)
    with pytest.raises(DomainError):
        response_probabilities(math.nan)


def test_budget_at_reference_point():
    b = derive_budget(1.0, 0.05, 1024, 4, 100)
    assert b.N == quantile_N(dist_W(1024, 4, 100), 0.05)
    assert b.epsilon0 == pytest.approx(1.0 / b.N)
    assert b.calibrated


def test_keep_probability_for_n4():
    b = PrivacyBudget(1.0, 0.05, 4, 0.25, 1024, 4, 100)
    assert b.keep_prob == pytest.approx(0.5621765, abs=1e-7)
    assert b.keep_prob + b.flip_prob == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(1e-3, 50.0),
    st.floats(1e-6, 0.999),
    st.integers(2, 4096),
    st.integers(1, 10),
    st.integers(1, 300),
)
def test_budget_invariants(eps, delta, m, k, size):
    b = derive_budget(eps, delta, m, k, size)
    assert 1 <= b.N <= 2 * k
    assert b.epsilon0 * b.N == pytest.approx(eps, rel=1e-12)
    assert 0.5 <= b.keep_prob <= 1.0
    assert b.keep_prob + b.flip_prob == pytest.approx(1.0, abs=1e-15)


def test_budget_domain_errors():
    for eps, delta in [(0.0, 0.05), (-1.0, 0.05), (math.inf, 0.05), (1.0, 0.0), (1.0, 1.0)]:
        with pytest.raises(DomainError):
            derive_budget(eps, delta, 1024, 4, 100)
    with pytest.raises(DomainError):
        PrivacyBudget(1.0, 0.05, 0, 1.0, 8, 1, 1)


def test_fixed_budget_is_uncalibrated():
    b = fixed_budget(0.0, 64, 2, 3)
    assert not b.calibrated and b.N == 1 and b.flip_prob == 0.5


def test_infinite_epsilon0_returns_the_filter_bits():
    f = _filter()
    pf = privatize(f, fixed_budget(math.inf, 1024, 4, 100), 3)
    assert np.array_equal(pf.bits, f.bits)


def test_zero_epsilon0_is_pure_noise():
    # each released bit is Bernoulli(1/2) regardless of the input
    m = 100_000
    f = bloom_init(range(5000), FilterParams(m, 4, seed=1))
    pf = privatize(f, fixed_budget(0.0, m, 4, 5000), 17)
    flips = np.count_nonzero(pf.bits != f.bits)
    assert abs(flips - m / 2) <= 3 * math.sqrt(m / 4)
    ones = np.count_nonzero(pf.bits)
    assert abs(ones - m / 2) <= 3 * math.sqrt(m / 4)


def test_flip_fraction_at_log3():
    m = 100_000
    f = bloom_init(range(1000), FilterParams(m, 3, seed=2))
    pf = privatize(f, fixed_budget(math.log(3), m, 3, 1000), 5)
    flips = np.count_nonzero(pf.bits != f.bits)
    assert abs(flips - 0.25 * m) <= 3 * math.sqrt(m * 0.25 * 0.75)


def test_flip_rate_same_for_set_and_clear_bits():
    m = 200_000
    f = bloom_init(range(20_000), FilterParams(m, 5, seed=4))
    pf = privatize(f, fixed_budget(1.0, m, 5, 20_000), 9)
    q = response_probabilities(1.0)[1]
    for mask in (f.bits, ~f.bits):
        n = np.count_nonzero(mask)
        flipped = np.count_nonzero(pf.bits[mask] != f.bits[mask])
        assert abs(flipped - q * n) <= 3 * math.sqrt(n * q * (1 - q))


def test_flips_are_pairwise_uncorrelated():
    # correlation of adjacent flip indicators should be within noise of zero
    m = 200_000
    z = np.zeros(m, dtype=bool)
    flips = randomized_response(z, 0.3, flip_generator(123)).astype(float)
    r = np.corrcoef(flips[:-1], flips[1:])[0, 1]
    assert abs(r) <= 4 / math.sqrt(m)


def test_privatize_is_reproducible():
    f = _filter()
    b = derive_budget(1.0, 0.05, 1024, 4, 100)
    assert privatize(f, b, 42) == privatize(f, b, 42)
    assert privatize(f, b, 42) != privatize(f, b, 43)


def test_privatize_uses_m_draws_in_order():
    f = _filter()
    b = derive_budget(2.0, 0.05, 1024, 4, 100)
    u = np.random.Generator(np.random.Philox(key=99)).random(1024)
    expected = f.bits ^ (u < b.flip_prob)
    assert np.array_equal(privatize(f, b, 99).bits, expected)


def test_privatize_checks_budget_provenance():
    f = _filter()
    with pytest.raises(DomainError, match="budget calibrated"):
        privatize(f, derive_budget(1.0, 0.05, 1024, 4, 99), 0)
    with pytest.raises(DomainError):
        privatize(f, derive_budget(1.0, 0.05, 2048, 4, 100), 0)


def test_bad_rng_seed():
    with pytest.raises(DomainError):
        flip_generator(-1)
    with pytest.raises(DomainError):
        flip_generator(1 << 64)


def test_private_query_all_ones_and_all_zeros():
    p = FilterParams(64, 3, 1000)
    b = fixed_budget(1.0, 64, 3, 1)
    ones = PrivateBloomFilter(p, np.ones(64, bool), b, 0)
    zeros = PrivateBloomFilter(p, np.zeros(64, bool), b, 0)
    assert all(private_query(ones, y) for y in range(1000))
    assert not any(private_query(zeros, y) for y in range(1000))


def test_private_query_many_matches_scalar():
    f = _filter(256, 3, 40)
    pf = privatize(f, derive_budget(3.0, 0.05, 256, 3, 40), 8)
    ys = list(range(0, 10**6, 997))
    assert pf.query_many(ys).tolist() == [pf.query(y) for y in ys]
    with pytest.raises(DomainError):
        pf.query(1 << 32)


def test_private_filter_is_immutable():
    f = _filter(64, 2, 5)
    pf = privatize(f, derive_budget(1.0, 0.1, 64, 2, 5), 1)
    assert pf.inserted_count == 5
    with pytest.raises(AttributeError):
        pf.rng_seed = 3
    with pytest.raises(ValueError):
        pf.bits[0] = True
    with pytest.raises(DomainError):
        PrivateBloomFilter(pf.params, np.zeros(3, bool), pf.budget, 0)
