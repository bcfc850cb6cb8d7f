"""Binary filter files: a 96-byte little-endian header followed by the bits.

Header layout (offsets in bytes)::

     0  magic           8s   b"DPBLOOM1"
     8  version         u16
    10  flags           u16  bit 0 = privatized
    12  k               u32
    16  m               u64
    24  n               u64
    32  hash_seed       u64
    40  inserted_count  u64
    48  epsilon         f64  0 unless privatized
    56  delta           f64  0 unless privatized
    64  epsilon0        f64  0 unless privatized
    72  N               u64  0 unless privatized
    80  rng_seed        u64  0 unless privatized
    88  payload_len     u64  ceil(m / 8)

Bit j of the array lives in byte j // 8 at bit position j % 8 (LSB first);
padding bits in the last byte are zero.
"""

from __future__ import annotations

import math
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .errors import DomainError, FileFormatError
from .filter import BloomFilter, FilterParams
from .mechanism import PrivacyBudget, PrivateBloomFilter

MAGIC = b"DPBLOOM1"
VERSION = 1
FLAG_PRIVATIZED = 0x1
HEADER = struct.Struct("<8sHHIQQQQdddQQQ")
assert HEADER.size == 96

AnyFilter = Union[BloomFilter, PrivateBloomFilter]


def pack_bits(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=bool), bitorder="little").tobytes()


def unpack_bits(payload: bytes, m: int) -> np.ndarray:
    raw = np.frombuffer(payload, dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")
    if bits[m:].any():
        raise FileFormatError("nonzero padding bits after position m")
    return bits[:m].astype(bool)


def dumps(f: AnyFilter) -> bytes:
    p = f.params
    if isinstance(f, PrivateBloomFilter):
        b = f.budget
        flags = FLAG_PRIVATIZED
        privacy = (b.epsilon, b.delta, b.epsilon0, b.N, f.rng_seed)
        inserted = b.dataset_size
    else:
        flags = 0
        privacy = (0.0, 0.0, 0.0, 0, 0)
        inserted = f.inserted_count
    payload = pack_bits(f.bits)
    header = HEADER.pack(MAGIC, VERSION, flags, p.k, p.m, p.n, p.seed, inserted, *privacy, len(payload))
    return header + payload


def loads(data: bytes) -> AnyFilter:
    if len(data) < HEADER.size:
        raise FileFormatError(f"file is {len(data)} bytes, shorter than the {HEADER.size}-byte header")
    (magic, version, flags, k, m, n, seed, inserted,
     eps, delta, eps0, big_n, rng_seed, payload_len) = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FileFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FileFormatError(f"unsupported version {version}")
    if flags & ~FLAG_PRIVATIZED:
        raise FileFormatError(f"unknown flag bits 0x{flags:04x}")
    if payload_len != math.ceil(m / 8):
        raise FileFormatError(f"payload_len {payload_len} does not match m={m}")
    if len(data) != HEADER.size + payload_len:
        raise FileFormatError(f"expected {HEADER.size + payload_len} bytes, found {len(data)}")
    try:
        params = FilterParams(m, k, n, seed)
    except DomainError as exc:
        raise FileFormatError(f"invalid filter parameters: {exc}") from exc
    bits = unpack_bits(data[HEADER.size:], m)

    if not flags & FLAG_PRIVATIZED:
        if (eps, delta, eps0, big_n, rng_seed) != (0.0, 0.0, 0.0, 0, 0):
            raise FileFormatError("privacy fields set on a non-privatized filter")
        return BloomFilter(params, bits, inserted)
    try:
        budget = PrivacyBudget(eps, delta, big_n, eps0, m, k, inserted)
    except DomainError as exc:
        raise FileFormatError(f"invalid privacy fields: {exc}") from exc
    return PrivateBloomFilter(params, bits, budget, rng_seed)


def save(f: AnyFilter, path: str | Path) -> None:
    Path(path).write_bytes(dumps(f))


def load(path: str | Path) -> AnyFilter:
    return loads(Path(path).read_bytes())
