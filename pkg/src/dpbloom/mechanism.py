"""Randomized-response perturbation of a Bloom filter's bit array."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calibration import dist_W, quantile_N
from .errors import DomainError
from .filter import MAX_U64, BloomFilter, FilterParams, _as_elements, _positions
from .hashing import positions_array


def response_probabilities(epsilon0: float) -> tuple[float, float]:
    """(keep, flip) = (e^eps0 / (e^eps0 + 1), 1 / (e^eps0 + 1)).

    Written with e^-eps0 so that eps0 = inf yields (1, 0) without overflow.
    """
    if not epsilon0 >= 0.0:
        raise DomainError(f"epsilon0 must be >= 0, got {epsilon0!r}")
    e = math.exp(-epsilon0)
    return 1.0 / (1.0 + e), e / (1.0 + e)


@dataclass(frozen=True)
class PrivacyBudget:
    """Global (epsilon, delta), the quantile N and the per-bit epsilon0.

    The (m, k, dataset_size) the budget was calibrated for travel with it;
    ``privatize`` refuses a filter with different dimensions. ``delta == 0``
    marks a budget fixed directly by epsilon0 rather than calibrated.
    """

    epsilon: float
    delta: float
    N: int
    epsilon0: float
    m: int
    k: int
    dataset_size: int

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if not self.epsilon0 >= 0.0:
            raise DomainError(f"epsilon0 must be >= 0, got {self.epsilon0}")

    @property
    def keep_prob(self) -> float:
        return response_probabilities(self.epsilon0)[0]

    @property
    def flip_prob(self) -> float:
        return response_probabilities(self.epsilon0)[1]

    @property
    def calibrated(self) -> bool:
        return self.delta > 0.0


def derive_budget(epsilon: float, delta: float, m: int, k: int, dataset_size: int) -> PrivacyBudget:
    """Calibrate epsilon0 = epsilon / N with N the 1 - delta quantile of W."""
    if not (epsilon > 0.0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon must be a positive finite number, got {epsilon!r}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    n = quantile_N(dist_W(m, k, dataset_size), delta)
    return PrivacyBudget(epsilon, delta, n, epsilon / n, m, k, dataset_size)


def fixed_budget(epsilon0: float, m: int, k: int, dataset_size: int) -> PrivacyBudget:
    """Uncalibrated budget with a chosen epsilon0 (0 gives pure noise).

    Only the experiment path uses this; it carries no (epsilon, delta) claim.
    """
    return PrivacyBudget(epsilon0, 0.0, 1, float(epsilon0), m, k, dataset_size)


def flip_generator(rng_seed: int) -> np.random.Generator:
    # Philox is counter based: draw j of the flip pass is addressable by index
    if not 0 <= rng_seed <= MAX_U64:
        raise DomainError(f"rng_seed must be an unsigned 64-bit integer, got {rng_seed!r}")
    return np.random.Generator(np.random.Philox(key=rng_seed))


def randomized_response(bits: np.ndarray, flip_prob: float, rng: np.random.Generator) -> np.ndarray:
    """Flip every entry of ``bits`` independently with ``flip_prob``.

    Consumes exactly ``bits.size`` uniforms in C order.
    """
    bits = np.asarray(bits, dtype=bool)
    return bits ^ (rng.random(bits.shape) < flip_prob)


class PrivateBloomFilter:
    """Perturbed bit array together with the budget and seed that produced it."""

    __slots__ = ("params", "bits", "budget", "rng_seed")

    def __init__(self, params: FilterParams, bits: np.ndarray, budget: PrivacyBudget, rng_seed: int):
        bits = np.array(bits, dtype=bool)
        if bits.shape != (params.m,):
            raise DomainError(f"bit array has shape {bits.shape}, expected ({params.m},)")
        bits.flags.writeable = False
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "budget", budget)
        object.__setattr__(self, "rng_seed", int(rng_seed))

    def __setattr__(self, name, value):
        raise AttributeError("PrivateBloomFilter is immutable")

    def __eq__(self, other):
        if not isinstance(other, PrivateBloomFilter):
            return NotImplemented
        return (
            self.params == other.params
            and self.budget == other.budget
            and self.rng_seed == other.rng_seed
            and np.array_equal(self.bits, other.bits)
        )

    __hash__ = None

    @property
    def inserted_count(self) -> int:
        return self.budget.dataset_size

    def query(self, y: int) -> bool:
        return private_query(self, y)

    def query_many(self, ys) -> np.ndarray:
        ys = _as_elements(ys, self.params)
        if ys.size == 0:
            return np.zeros(0, dtype=bool)
        idx = positions_array(self.params.seed, ys, self.params.k, self.params.m)
        return self.bits[idx].all(axis=-1)


def privatize(filter: BloomFilter, budget: PrivacyBudget, rng_seed: int) -> PrivateBloomFilter:
    """Release a randomized-response copy of ``filter.bits``."""
    p = filter.params
    if (budget.m, budget.k, budget.dataset_size) != (p.m, p.k, filter.inserted_count):
        raise DomainError(
            f"budget calibrated for (m={budget.m}, k={budget.k}, |A|={budget.dataset_size}) "
            f"but filter has (m={p.m}, k={p.k}, |A|={filter.inserted_count})"
        )
    noisy = randomized_response(filter.bits, budget.flip_prob, flip_generator(rng_seed))
    return PrivateBloomFilter(p, noisy, budget, rng_seed)


def private_query(filter: PrivateBloomFilter, y: int) -> bool:
    filter.params.check_element(y)
    bits = filter.bits
    return all(bits[j] for j in _positions(filter.params, y))
