"""Seeded 64-bit hash family mapping universe elements to bit positions.

Every position h_i(x) is produced by its own pass through the splitmix64
finalizer, so the k positions of one element behave like k independent
uniform draws (collisions included). Scalar and numpy paths produce
identical values.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STEP = 0xD1B54A32D192ED03
TOKEN_DOMAIN = 0x5DEECE66D1B2F3A7

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer; a bijection on 64-bit integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def element_key(seed: int, x: int) -> int:
    return mix64(seed + (x + 1) * GOLDEN)


def position(key: int, i: int, m: int) -> int:
    return mix64(key + (i + 1) * STEP) % m


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def positions_array(seed, xs, k: int, m: int) -> np.ndarray:
    """Vectorized positions with shape ``broadcast(seed, xs).shape + (k,)``.

    ``seed`` may be a scalar or an array broadcastable against ``xs`` (the
    Monte Carlo oracles draw one hash seed per trial).
    """
    seed = np.asarray(seed, dtype=np.uint64)
    xs = np.asarray(xs, dtype=np.uint64)
    with np.errstate(over="ignore"):
        keys = mix64_array(seed + (xs + np.uint64(1)) * np.uint64(GOLDEN))
        steps = (np.arange(1, k + 1, dtype=np.uint64) * np.uint64(STEP))
        mixed = mix64_array(keys[..., None] + steps)
    return (mixed % np.uint64(m)).astype(np.int64)


def token_to_element(token: str, n: int) -> int:
    """Map a non-numeric dataset token into ``[0, n)``."""
    data = token.encode("utf-8")
    h = mix64(TOKEN_DOMAIN ^ len(data))
    for off in range(0, len(data), 8):
        chunk = int.from_bytes(data[off:off + 8], "little")
        h = mix64(h ^ chunk)
        h = mix64(h + GOLDEN)
    return h % n
