"""Bit packing, varints, and zigzag coding."""

import numpy as np
import pytest

from adjpack.bitio import (
    MAX_WIDTH,
    PackedArray,
    bits_for,
    bits_for_array,
    pack_ragged,
    read_bits,
    read_bits_many,
    unpack_ragged,
    varint_decode,
    varint_decode_stream,
    varint_encode,
    varint_encode_array,
    varint_lengths,
    zigzag_decode,
    zigzag_decode_array,
    zigzag_encode,
    zigzag_encode_array,
)
from adjpack.errors import CodecError
from conftest import ref_unpack


def test_pack_three_two_bit_values():
    pa = PackedArray.pack([1, 2, 3], width=2)
    assert pa.data[0] == 0x39
    assert pa.unpack().tolist() == [1, 2, 3]


def test_pack_has_slack_bytes():
    pa = PackedArray.pack([1, 2, 3], width=2)
    # one payload byte plus eight zero slack bytes so wide loads stay in
    # bounds near the end of the buffer
    n_payload = len(pa.payload_bytes())
    assert len(pa.data) == n_payload + 8
    assert bytes(pa.data[n_payload:]) == b"\x00" * 8


@pytest.mark.parametrize("width", [1, 2, 3, 7, 8, 13, 31, 32, 33, 57, 58, 63, 64])
def test_pack_unpack_round_trip(width):
    rng = np.random.default_rng(width)
    hi = min(width, 63)
    vals = rng.integers(0, 2 ** hi, size=257, dtype=np.uint64)
    if width == 64:
        vals[0] = np.uint64(2 ** 64 - 1)
    pa = PackedArray.pack(vals, width=width)
    assert pa.width == width
    assert pa.count == 257
    got = pa.unpack()
    assert np.array_equal(got, vals)
    # and the layout matches a bit-by-bit reference reader
    ref = ref_unpack(bytes(pa.data), 257, width)
    assert [int(x) for x in vals] == ref


def test_packed_get_and_gather():
    rng = np.random.default_rng(9)
    vals = rng.integers(0, 2 ** 17, size=100, dtype=np.uint64)
    pa = PackedArray.pack(vals, width=17)
    for i in (0, 1, 50, 99):
        assert pa.get(i) == int(vals[i])
    idx = rng.integers(0, 100, size=40)
    assert np.array_equal(pa.gather(idx), vals[idx])


def test_packed_from_payload_round_trip():
    vals = [5, 0, 31, 17]
    pa = PackedArray.pack(vals, width=5)
    pb = PackedArray.from_payload(pa.payload_bytes(), count=4, width=5)
    assert pb.unpack().tolist() == vals


def test_read_bits_matches_reference():
    rng = np.random.default_rng(3)
    raw = rng.integers(0, 256, size=64, dtype=np.uint8)
    buf = np.concatenate([raw, np.zeros(8, dtype=np.uint8)])
    as_int = int.from_bytes(bytes(raw), "little")
    for pos, width in [(0, 1), (3, 7), (8, 57), (101, 33), (400, 57), (511, 1)]:
        expect = (as_int >> pos) & ((1 << width) - 1)
        assert read_bits(buf, pos, width) == expect
    positions = np.array([0, 3, 8, 101, 400, 451], dtype=np.int64)
    got = read_bits_many(buf, positions, 33)
    expect = [(as_int >> int(p)) & ((1 << 33) - 1) for p in positions]
    assert [int(x) for x in got] == expect


def test_pack_ragged_round_trip():
    rng = np.random.default_rng(21)
    widths = np.repeat(rng.integers(1, 41, size=30), 10)
    caps = (np.uint64(1) << widths.astype(np.uint64))
    vals = rng.integers(0, 2 ** 41, size=300, dtype=np.uint64) % caps
    buf, total_bits = pack_ragged(vals, widths)
    assert total_bits == int(widths.sum())
    starts = np.concatenate([[0], np.cumsum(widths)[:-1]])
    got = unpack_ragged(np.frombuffer(buf, dtype=np.uint8), starts, widths)
    assert np.array_equal(got, vals)


def test_bits_for_matches_bit_length():
    for x in [0, 1, 2, 3, 255, 256, 2 ** 41, 2 ** 63 - 1]:
        assert bits_for(x) == max(1, x.bit_length())
    arr = np.array([0, 1, 7, 8, 2 ** 33], dtype=np.uint64)
    assert np.array_equal(bits_for_array(arr),
                          [max(1, int(x).bit_length()) for x in arr])
    assert MAX_WIDTH == 64


def test_varint_single_values():
    assert varint_encode(128) == bytes([0x80, 0x01])
    assert varint_encode(0) == bytes([0x00])
    assert varint_encode(127) == bytes([0x7F])
    for x in [0, 1, 127, 128, 300, 2 ** 21, 2 ** 62, 2 ** 63 - 1]:
        data = varint_encode(x)
        val, pos = varint_decode(data)
        assert (val, pos) == (x, len(data))
        assert varint_lengths(np.array([x], dtype=np.uint64))[0] == len(data)


def test_varint_stream_round_trip():
    rng = np.random.default_rng(8)
    vals = np.concatenate([
        rng.integers(0, 2 ** 7, size=200, dtype=np.uint64),
        rng.integers(0, 2 ** 30, size=200, dtype=np.uint64),
        np.array([0, 127, 128, 2 ** 62], dtype=np.uint64),
    ])
    blob = varint_encode_array(vals)
    assert len(blob) == int(varint_lengths(vals).sum())
    got, ends = varint_decode_stream(blob)
    assert np.array_equal(got.astype(np.uint64), vals)
    assert ends[-1] == len(blob)


def test_varint_stream_narrow_dtype():
    small, _ = varint_decode_stream(varint_encode_array(
        np.array([1, 300, 2 ** 27], dtype=np.uint64)))
    assert small.dtype == np.uint32
    wide, _ = varint_decode_stream(varint_encode_array(
        np.array([2 ** 40], dtype=np.uint64)))
    assert wide.dtype == np.uint64
    assert int(wide[0]) == 2 ** 40


def test_varint_stream_rejects_truncation():
    with pytest.raises(CodecError):
        varint_decode_stream(np.array([0x80], dtype=np.uint8))
    with pytest.raises(CodecError):
        varint_decode_stream(np.array([0xFF] * 11, dtype=np.uint8))


def test_zigzag_pairs():
    expect = {0: 0, -1: 1, 1: 2, -2: 3, 2: 4}
    for signed, coded in expect.items():
        assert zigzag_encode(signed) == coded
        assert zigzag_decode(coded) == signed
    vals = np.array([0, -1, 1, -2, 2, -(2 ** 40), 2 ** 40], dtype=np.int64)
    coded = zigzag_encode_array(vals)
    assert np.array_equal(zigzag_decode_array(coded), vals)
    assert coded.dtype == np.uint64
