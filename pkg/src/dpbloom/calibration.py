"""Exact distribution of the bit-difference count W between neighboring filters.

Three layers build on each other:

* ``dist_Y``: number of distinct positions among one element's k hashes.
* ``dist_Z_given_Y``: size of the union of two elements' position sets,
  conditioned on the two set sizes.
* ``dist_W``: the mixture over (|Y_x|, |Y_x'|, |Z|) of a binomial count of
  exclusive-or positions that no other element covers.

``quantile_N`` turns W into the divisor used to split a global epsilon
across bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import CalibrationDomainError, DomainError, NumericalError
from .filter import MAX_K

NEGATIVE_CLAMP = 1e-12
SLICE_TOL = 1e-6
NORM_TOL = 1e-6


def _check_mk(m: int, k: int) -> None:
    if not isinstance(m, (int, np.integer)) or m < 2:
        raise DomainError(f"m must be an integer >= 2, got {m!r}")
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_K:
        raise DomainError(f"k must be in [1, {MAX_K}], got {k!r}")


def comb(n: int, r: int) -> int:
    """Binomial coefficient, zero whenever r < 0 or r > n."""
    if r < 0 or n < 0 or r > n:
        return 0
    return math.comb(n, r)


def falling(n: int, r: int) -> int:
    """Falling factorial n!/(n-r)!, zero when r > n."""
    if r < 0 or r > n:
        return 0
    return math.perm(n, r)


def log_falling(n: int, r: int) -> float:
    if r < 0 or r > n:
        return -math.inf
    return math.fsum(math.log(n - j) for j in range(r))


@dataclass(frozen=True)
class YDistribution:
    """Distribution of the distinct-position count of one element.

    ``pmf`` has length k + 1 and is indexed by y; ``pmf[0]`` is always 0.
    """

    m: int
    k: int
    pmf: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.pmf.flags.writeable = False


@lru_cache(maxsize=256)
def _y_counts(m: int, k: int) -> tuple[int, ...]:
    # counts[y] = number of k-tuples over [m] with exactly y distinct values
    counts = [0] * (k + 1)
    for y in range(1, k + 1):
        c = comb(m, y) * y**k - sum(comb(m - i, y - i) * counts[i] for i in range(1, y))
        if c < 0:
            raise NumericalError(f"negative count for |Y|={y} (m={m}, k={k})")
        counts[y] = c
    return tuple(counts)


def dist_Y_exact(m: int, k: int) -> list[Fraction]:
    """Rational pmf of |Y|; index 0 is the (empty) y = 0 slot."""
    _check_mk(m, k)
    total = m**k
    return [Fraction(c, total) for c in _y_counts(m, k)]


@lru_cache(maxsize=256)
def _dist_Y(m: int, k: int) -> YDistribution:
    pmf = np.array([float(p) for p in dist_Y_exact(m, k)])
    s = pmf.sum()
    if abs(s - 1.0) > 1e-9:
        raise NumericalError(f"|Y| pmf sums to {s} (m={m}, k={k})")
    return YDistribution(m, k, pmf)


def dist_Y(m: int, k: int) -> YDistribution:
    """Distribution of |Y| via the inclusion-exclusion recurrence.

    The recurrence subtracts, from the count of tuples whose values fall in
    some y-subset, the tuples already accounted for by smaller images. It is
    carried out over integers: in floating point the leading term
    C(m, y) y^k / m^k grows like e^k and the subtraction cancels
    catastrophically for large m.
    """
    _check_mk(m, k)
    return _dist_Y(int(m), int(k))


@dataclass(frozen=True)
class ZConditional:
    """Pr[|Z| = z | |Y_x| = a, |Y_x'| = b] as a (k+1, k+1, 2k+1) table.

    Slices with a > m or b > m condition on an impossible event and are left
    at zero; ``feasible[a, b]`` marks the others.
    """

    m: int
    k: int
    table: np.ndarray = field(repr=False)
    feasible: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.table.flags.writeable = False
        self.feasible.flags.writeable = False

    def slice(self, a: int, b: int) -> np.ndarray:
        return self.table[a, b]

    @staticmethod
    def t(a: int, b: int, z: int) -> int:
        return z - max(a, b)

    @staticmethod
    def overlap(a: int, b: int, z: int) -> int:
        """n1: positions shared by both elements."""
        return a + b - z

    @staticmethod
    def exclusive(a: int, b: int, z: int) -> int:
        """n2: positions hit by exactly one of the two elements."""
        return 2 * z - a - b


def z_given_y_exact(m: int, a: int, b: int, z: int) -> Fraction:
    """Rational form of the conditional union-size probability."""
    hi, lo = max(a, b), min(a, b)
    t = z - hi
    den = falling(m, lo)
    if den == 0 or t < 0 or t > lo:
        return Fraction(0)
    return Fraction(comb(lo, t) * falling(m - hi, t) * falling(hi, lo - t), den)


def _z_given_y_log(m: int, a: int, b: int, z: int) -> float:
    hi, lo = max(a, b), min(a, b)
    t = z - hi
    if t < 0 or t > lo:
        return 0.0
    num = log_falling(m - hi, t) + log_falling(hi, lo - t)
    if num == -math.inf:
        return 0.0
    return math.exp(math.log(comb(lo, t)) + num - log_falling(m, lo))


@lru_cache(maxsize=256)
def _dist_Z(m: int, k: int) -> ZConditional:
    table = np.zeros((k + 1, k + 1, 2 * k + 1))
    feasible = np.zeros((k + 1, k + 1), dtype=bool)
    top = min(k, m)
    for a in range(1, top + 1):
        for b in range(1, top + 1):
            # the x' positions are placed against a fixed x set; by symmetry
            # the larger set plays the role of x
            for z in range(max(a, b), min(a + b, m) + 1):
                table[a, b, z] = _z_given_y_log(m, a, b, z)
            s = table[a, b].sum()
            if abs(s - 1.0) > SLICE_TOL:
                raise CalibrationDomainError(
                    f"Pr[|Z| | a={a}, b={b}] sums to {s} for m={m}, k={k}"
                )
            feasible[a, b] = True
    return ZConditional(m, k, table, feasible)


def dist_Z_given_Y(m: int, k: int) -> ZConditional:
    """Conditional distribution of the union size of two position sets.

    With a >= b and t = z - a new positions contributed by the smaller set,
    the probability is C(b, t) * A(m-a, t) * A(a, b-t) / A(m, b), where A is
    the falling factorial. Evaluated in log space.
    """
    _check_mk(m, k)
    return _dist_Z(int(m), int(k))


@dataclass(frozen=True)
class WDistribution:
    """pmf and CDF of W over its support {0, ..., 2k}."""

    m: int
    k: int
    dataset_size: int
    p0: float
    pmf: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.pmf.flags.writeable = False
        self.cdf.flags.writeable = False

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(self.pmf.size), self.pmf))


def zero_probability(m: int, k: int, dataset_size: int) -> float:
    """p0 = (1 - 1/m)^((|A|-1) k): a fixed bit stays 0 after |A|-1 inserts."""
    return math.exp((dataset_size - 1) * k * math.log1p(-1.0 / m))


def _binom_pmf(n: int, w: int, p: float) -> float:
    if w > n:
        return 0.0
    return comb(n, w) * p**w * (1.0 - p) ** (n - w)


@lru_cache(maxsize=1024)
def _dist_W(m: int, k: int, dataset_size: int) -> WDistribution:
    y = dist_Y(m, k).pmf
    zc = dist_Z_given_Y(m, k)
    p0 = zero_probability(m, k, dataset_size)
    pmf = np.zeros(2 * k + 1)
    for a in range(1, k + 1):
        for b in range(1, k + 1):
            wab = y[a] * y[b]
            if wab == 0.0:
                continue
            for z in range(max(a, b), min(a + b, m) + 1):
                pz = zc.table[a, b, z]
                if pz == 0.0:
                    continue
                n2 = 2 * z - a - b
                for w in range(n2 + 1):
                    pmf[w] += _binom_pmf(n2, w, p0) * pz * wab
    total = pmf.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise NumericalError(f"W pmf sums to {total} (m={m}, k={k}, |A|={dataset_size})")
    return WDistribution(m, k, dataset_size, p0, pmf, np.cumsum(pmf))


def dist_W(m: int, k: int, dataset_size: int) -> WDistribution:
    """Distribution of W for a dataset of ``dataset_size`` elements.

    Memoized per (m, k, dataset_size); the result is immutable.
    """
    _check_mk(m, k)
    if not isinstance(dataset_size, (int, np.integer)) or dataset_size < 1:
        raise DomainError(f"dataset_size must be >= 1, got {dataset_size!r}")
    return _dist_W(int(m), int(k), int(dataset_size))


def quantile_raw(dist: WDistribution, delta: float) -> int:
    """Smallest w with cdf[w] >= 1 - delta, saturating at 2k."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    hits = np.nonzero(dist.cdf >= 1.0 - delta)[0]
    return int(hits[0]) if hits.size else dist.pmf.size - 1


def quantile_N(dist: WDistribution, delta: float) -> int:
    """The 1 - delta quantile of W, clamped to at least 1.

    A raw quantile of 0 means the arrays coincide with probability >= 1 - delta;
    returning 1 keeps epsilon / N defined.
    """
    return max(quantile_raw(dist, delta), 1)
