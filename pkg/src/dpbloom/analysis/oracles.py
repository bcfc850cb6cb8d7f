"""Independent oracles for the calibration distributions.

``enumerate_y`` and ``enumerate_z`` count every hash configuration of a
small instance exactly. ``mc_w_samples`` simulates neighboring datasets
through the real hash family. ``occupancy_w_distribution`` gives the exact
law of W, accounting for the dependence between empty positions.
"""

from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

import numpy as np

from .._parallel import map_batches
from ..calibration import YDistribution, ZConditional, comb, dist_Y, dist_Z_given_Y, _check_mk
from ..errors import DomainError
from ..hashing import positions_array

ENUMERATION_LIMIT = 10**7
DEFAULT_UNIVERSE = 1 << 32


def enumerate_y_exact(m: int, k: int) -> list[Fraction]:
    _check_mk(m, k)
    if m**k > ENUMERATION_LIMIT:
        raise DomainError(f"m^k = {m**k} exceeds enumeration limit {ENUMERATION_LIMIT}")
    counts = Counter(len(set(t)) for t in itertools.product(range(m), repeat=k))
    total = m**k
    return [Fraction(counts.get(y, 0), total) for y in range(k + 1)]


def enumerate_y(m: int, k: int) -> YDistribution:
    """Distinct-value count over all m^k hash tuples."""
    return YDistribution(m, k, np.array([float(p) for p in enumerate_y_exact(m, k)]))


def enumerate_z_exact(m: int, k: int) -> dict[tuple[int, int], dict[int, Fraction]]:
    """Union-size law for every feasible (a, b), by brute force.

    Each position set is an ordered injective placement, so every set of a
    given size is equally likely.
    """
    _check_mk(m, k)
    top = min(k, m)
    placements = {a: [frozenset(p) for p in itertools.permutations(range(m), a)] for a in range(1, top + 1)}
    work = sum(len(placements[a]) for a in placements) ** 2
    if work > ENUMERATION_LIMIT:
        raise DomainError(f"{work} placement pairs exceed enumeration limit {ENUMERATION_LIMIT}")
    out = {}
    for a in range(1, top + 1):
        for b in range(1, top + 1):
            counts = Counter(len(s | t) for s in placements[a] for t in placements[b])
            total = len(placements[a]) * len(placements[b])
            out[a, b] = {z: Fraction(c, total) for z, c in counts.items()}
    return out


def enumerate_z(m: int, k: int) -> ZConditional:
    table = np.zeros((k + 1, k + 1, 2 * k + 1))
    feasible = np.zeros((k + 1, k + 1), dtype=bool)
    for (a, b), law in enumerate_z_exact(m, k).items():
        feasible[a, b] = True
        for z, p in law.items():
            table[a, b, z] = float(p)
    return ZConditional(m, k, table, feasible)


def _w_batch(m: int, k: int, dataset_size: int, n: int):
    a = dataset_size

    def run(start: int, size: int, rng: np.random.Generator) -> np.ndarray:
        seeds = rng.integers(0, np.iinfo(np.uint64).max, size=size, dtype=np.uint64, endpoint=True)
        base = rng.integers(0, n - a, size=size, dtype=np.uint64, endpoint=True)
        # element 0 is removed, element a is its substitute, 1..a-1 stay
        xs = base[:, None] + np.arange(a + 1, dtype=np.uint64)
        pos = positions_array(seeds[:, None], xs, k, m)
        offset = (np.arange(size, dtype=np.int64) * m)[:, None]
        covered = np.zeros(size * m, dtype=bool)
        covered[(pos[:, 1:a, :].reshape(size, -1) + offset).ravel()] = True
        g = covered.copy()
        g[(pos[:, 0, :] + offset).ravel()] = True
        g2 = covered
        g2[(pos[:, a, :] + offset).ravel()] = True
        return (g != g2).reshape(size, m).sum(axis=1)

    return run


def mc_w_samples(m: int, k: int, dataset_size: int, trials: int, rng_seed: int, n: int = DEFAULT_UNIVERSE) -> np.ndarray:
    """W for ``trials`` independent neighboring pairs, each with a fresh hash seed."""
    _check_mk(m, k)
    if dataset_size < 1:
        raise DomainError(f"dataset_size must be >= 1, got {dataset_size}")
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    if n <= dataset_size:
        raise DomainError(f"universe size {n} must exceed dataset_size {dataset_size}")
    parts = map_batches(_w_batch(m, k, dataset_size, n), trials, rng_seed)
    return np.concatenate(parts)


def mc_w_distribution(m: int, k: int, dataset_size: int, trials: int, rng_seed: int, n: int = DEFAULT_UNIVERSE) -> np.ndarray:
    """Empirical pmf of W over {0, ..., 2k}."""
    if trials < 10_000:
        raise DomainError(f"trials must be >= 10^4 for a usable histogram, got {trials}")
    w = mc_w_samples(m, k, dataset_size, trials, rng_seed, n)
    return np.bincount(w, minlength=2 * k + 1) / trials


def empirical_quantile(pmf: np.ndarray, delta: float) -> int:
    """First index where the running sum of ``pmf`` reaches 1 - delta."""
    hits = np.nonzero(np.cumsum(pmf) >= 1.0 - delta)[0]
    return int(hits[0]) if hits.size else len(pmf) - 1


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def occupancy_w_distribution(m: int, k: int, dataset_size: int) -> np.ndarray:
    """Exact pmf of W without treating empty positions as independent.

    Given n2 exclusive-or positions, the number left uncovered by the
    (|A| - 1) k hashes of the unchanged elements follows the occupancy law
    C(n2, w) sum_j (-1)^j C(n2 - w, j) (1 - (w + j)/m)^r. Mixed over the same
    (a, b, z) weights as the calibrated distribution.
    """
    y = dist_Y(m, k).pmf
    zc = dist_Z_given_Y(m, k)
    r = (dataset_size - 1) * k
    cond = {}
    for n2 in range(2 * k + 1):
        row = []
        for w in range(n2 + 1):
            s = sum((-1) ** j * comb(n2 - w, j) * (1.0 - (w + j) / m) ** r for j in range(n2 - w + 1))
            row.append(comb(n2, w) * s)
        cond[n2] = row
    pmf = np.zeros(2 * k + 1)
    for a in range(1, k + 1):
        for b in range(1, k + 1):
            for z in range(max(a, b), min(a + b, m) + 1):
                weight = zc.table[a, b, z] * y[a] * y[b]
                if weight:
                    n2 = 2 * z - a - b
                    pmf[: n2 + 1] += weight * np.array(cond[n2])
    return pmf
