"""Standard Bloom filter: construction over a dataset and membership query."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError
from .hashing import element_key, position, positions_array

MAX_K = 64
MAX_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class FilterParams:
    """Dimensions and hash seed shared by plain and private filters.

    Attributes:
        m: Bit-array length.
        k: Number of hash functions.
        n: Universe size; elements are integers in ``[0, n)``.
        seed: 64-bit root seed from which all k hash functions derive.
    """

    m: int
    k: int
    n: int = 1 << 32
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 2:
            raise DomainError(f"m must be an integer >= 2, got {self.m!r}")
        if not isinstance(self.k, (int, np.integer)) or not 1 <= self.k <= MAX_K:
            raise DomainError(f"k must be in [1, {MAX_K}], got {self.k!r}")
        if not 1 <= self.n <= MAX_U64:
            raise DomainError(f"n must be in [1, 2^64), got {self.n!r}")
        if not 0 <= self.seed <= MAX_U64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    def check_element(self, x: int) -> None:
        if not 0 <= x < self.n:
            raise DomainError(f"element {x} outside universe [0, {self.n})")


def hash_index(params: FilterParams, i: int, x: int) -> int:
    """Position of element ``x`` under the ``i``-th hash function."""
    if not 0 <= i < params.k:
        raise DomainError(f"hash index {i} outside [0, {params.k})")
    params.check_element(x)
    return position(element_key(params.seed, x), i, params.m)


def _positions(params: FilterParams, x: int) -> list[int]:
    key = element_key(params.seed, x)
    return [position(key, i, params.m) for i in range(params.k)]


def _as_elements(values, params: FilterParams) -> np.ndarray:
    if isinstance(values, np.ndarray):
        if values.dtype.kind not in "iu":
            raise DomainError(f"elements must be integers, got dtype {values.dtype}")
        if values.dtype.kind == "i" and (values < 0).any():
            raise DomainError("elements must be non-negative")
        arr = values.astype(np.uint64).ravel()
    else:
        vals = list(values)
        for v in vals:
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise DomainError(f"elements must be integers, got {v!r}")
            if not 0 <= v <= MAX_U64:
                raise DomainError(f"element {v} is not an unsigned 64-bit integer")
        arr = np.array(vals, dtype=np.uint64)
    over = arr >= np.uint64(params.n)
    if over.any():
        raise DomainError(f"element {int(arr[over][0])} outside universe [0, {params.n})")
    return arr


class BloomFilter:
    """Ground-truth bit array built from a dataset; read-only once built."""

    __slots__ = ("params", "bits", "inserted_count")

    def __init__(self, params: FilterParams, bits: np.ndarray, inserted_count: int):
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (params.m,):
            raise DomainError(f"bit array has shape {bits.shape}, expected ({params.m},)")
        if inserted_count < 0:
            raise DomainError("inserted_count must be non-negative")
        bits = bits.copy()
        bits.flags.writeable = False
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "inserted_count", int(inserted_count))

    def __setattr__(self, name, value):
        raise AttributeError("BloomFilter is immutable")

    def __eq__(self, other):
        if not isinstance(other, BloomFilter):
            return NotImplemented
        return (
            self.params == other.params
            and self.inserted_count == other.inserted_count
            and np.array_equal(self.bits, other.bits)
        )

    __hash__ = None

    def __repr__(self):
        p = self.params
        return f"BloomFilter(m={p.m}, k={p.k}, inserted={self.inserted_count}, ones={self.popcount()})"

    def popcount(self) -> int:
        return int(self.bits.sum())

    def query(self, y: int) -> bool:
        return bloom_query(self, y)

    def query_many(self, ys) -> np.ndarray:
        ys = _as_elements(ys, self.params)
        if ys.size == 0:
            return np.zeros(0, dtype=bool)
        idx = positions_array(self.params.seed, ys, self.params.k, self.params.m)
        return self.bits[idx].all(axis=-1)


def bloom_init(dataset: Iterable[int], params: FilterParams) -> BloomFilter:
    """Build the filter for ``dataset``; duplicates count once toward |A|."""
    elems = np.unique(_as_elements(dataset, params))
    bits = np.zeros(params.m, dtype=bool)
    if elems.size:
        bits[positions_array(params.seed, elems, params.k, params.m).ravel()] = True
    return BloomFilter(params, bits, elems.size)


def bloom_query(filter: BloomFilter, y: int) -> bool:
    filter.params.check_element(y)
    bits = filter.bits
    return all(bits[j] for j in _positions(filter.params, y))
