import struct

import numpy as np
import pytest

from dpbloom import FileFormatError, FilterParams, bloom_init, derive_budget, fixed_budget, privatize
from dpbloom.fileformat import HEADER, MAGIC, dumps, load, loads, pack_bits, save, unpack_bits


@pytest.fixture
def standard():
    return bloom_init(range(0, 500, 7), FilterParams(1001, 4, 10**6, seed=123))


@pytest.fixture
def private(standard):
    return privatize(standard, derive_budget(1.5, 0.05, 1001, 4, standard.inserted_count), 77)


def test_header_is_96_bytes(standard):
    assert HEADER.size == 96
    data = dumps(standard)
    assert len(data) == 96 + 126
    assert data[:8] == MAGIC


def test_header_fields(private):
    fields = struct.unpack("<8sHHIQQQQdddQQQ", dumps(private)[:96])
    b = private.budget
    assert fields[1:] == (1, 1, 4, 1001, 10**6, 123, private.inserted_count,
                          b.epsilon, b.delta, b.epsilon0, b.N, 77, 126)


def test_round_trip_standard(standard, tmp_path):
    path = tmp_path / "f.bin"
    save(standard, path)
    again = load(path)
    assert again == standard
    assert dumps(again) == path.read_bytes()


def test_round_trip_private(private, tmp_path):
    path = tmp_path / "p.bin"
    save(private, path)
    again = load(path)
    assert again == private
    assert dumps(again) == path.read_bytes()


def test_zero_epsilon0_private_filter_round_trips(standard):
    pf = privatize(standard, fixed_budget(0.0, 1001, 4, standard.inserted_count), 5)
    assert loads(dumps(pf)) == pf


def test_bits_are_lsb_first():
    bits = np.zeros(10, bool)
    bits[[0, 3, 9]] = True
    assert pack_bits(bits) == bytes([0b00001001, 0b00000010])
    assert unpack_bits(pack_bits(bits), 10).tolist() == bits.tolist()


def test_nonzero_padding_rejected():
    with pytest.raises(FileFormatError, match="padding"):
        unpack_bits(bytes([0, 0b00000100]), 10)


def _patch(data, offset, fmt, value):
    buf = bytearray(data)
    struct.pack_into(fmt, buf, offset, value)
    return bytes(buf)


@pytest.mark.parametrize(
    "offset,fmt,value,match",
    [
        (0, "8s", b"DPBLOOM2", "magic"),
        (8, "<H", 2, "version"),
        (10, "<H", 4, "flag"),
        (88, "<Q", 3, "payload_len"),
        (12, "<I", 0, "parameters"),
        (16, "<Q", 1, "payload_len"),
    ],
)
def test_corrupt_headers_rejected(standard, offset, fmt, value, match):
    with pytest.raises(FileFormatError, match=match):
        loads(_patch(dumps(standard), offset, fmt, value))


def test_truncated_and_extended_files(standard):
    data = dumps(standard)
    with pytest.raises(FileFormatError):
        loads(data[:50])
    with pytest.raises(FileFormatError):
        loads(data[:-1])
    with pytest.raises(FileFormatError):
        loads(data + b"\0")


def test_privacy_fields_on_standard_filter_rejected(standard):
    with pytest.raises(FileFormatError, match="privacy fields"):
        loads(_patch(dumps(standard), 48, "<d", 1.0))


def test_invalid_privacy_fields_rejected(private):
    with pytest.raises(FileFormatError, match="privacy"):
        loads(_patch(dumps(private), 72, "<Q", 0))
