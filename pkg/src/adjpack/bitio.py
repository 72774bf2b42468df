"""Bit-level primitives: fixed-width packed arrays, varint and zigzag codecs.

Layout convention used everywhere in this package: bits are packed LSB-first
within bytes and bytes are little-endian, so the value starting at bit position
p can be recovered with one unaligned 64-bit load:

    word = le64(data[p >> 3 :])
    value = (word >> (p & 7)) & ((1 << width) - 1)

which is why widths up to 57 need a single load (7 bits of shift slack) and
wider fields fall back to a 9-byte load.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError, CodecError, DomainError

MAX_WIDTH = 64
_SINGLE_LOAD_MAX = 57
_SLACK_BYTES = 8
_CHUNK = 1 << 20


def bits_for(max_value: int) -> int:
    """Number of bits needed to store values in [0, max_value], at least 1."""
    if max_value < 0:
        raise DomainError(f"bits_for needs a non-negative bound, got {max_value}")
    return max(1, int(max_value).bit_length())


def bits_for_array(values) -> np.ndarray:
    """Vectorized bits_for over a non-negative integer array."""
    v = np.ascontiguousarray(values, dtype=np.uint64).copy()
    out = np.zeros(len(v), dtype=np.int64)
    for s in (32, 16, 8, 4, 2, 1):
        big = v >= (np.uint64(1) << np.uint64(s))
        out[big] += s
        v[big] >>= np.uint64(s)
    out += (v > 0)
    return np.maximum(out, 1)


def read_bits(data, bitpos: int, width: int) -> int:
    """Read `width` bits starting at absolute bit position `bitpos`."""
    addr = bitpos >> 3
    nbytes = 8 if width <= _SINGLE_LOAD_MAX else 9
    word = int.from_bytes(data[addr : addr + nbytes], "little")
    return (word >> (bitpos & 7)) & ((1 << width) - 1)


def _values_to_bits(vals: np.ndarray, width: int) -> np.ndarray:
    # (k, width) matrix of 0/1, LSB first, flattened to k*width bits
    shifts = np.arange(width, dtype=np.uint64)
    return ((vals[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).reshape(-1)


def _bits_to_values(bits: np.ndarray, width: int) -> np.ndarray:
    mat = bits.reshape(-1, width).astype(np.uint64)
    mat <<= np.arange(width, dtype=np.uint64)
    return mat.sum(axis=1, dtype=np.uint64)


class PackedArray:
    """Immutable array of `count` fixed-width unsigned integers.

    `data` keeps 8 slack zero bytes past the payload so that reads near the
    end never index out of bounds.
    """

    __slots__ = ("data", "width", "count", "_mask")

    def __init__(self, data: bytes, width: int, count: int):
        if not 1 <= width <= MAX_WIDTH:
            raise DomainError(f"width must be in [1, {MAX_WIDTH}], got {width}")
        self.data = data
        self.width = width
        self.count = count
        self._mask = (1 << width) - 1

    @classmethod
    def pack(cls, values, width: int) -> "PackedArray":
        if not 1 <= width <= MAX_WIDTH:
            raise DomainError(f"width must be in [1, {MAX_WIDTH}], got {width}")
        vals = np.ascontiguousarray(values, dtype=np.uint64)
        n = len(vals)
        if n and width < MAX_WIDTH and int(vals.max()) >> width:
            raise CapacityError(
                f"value {int(vals.max())} does not fit in {width} bits"
            )
        total_bits = n * width
        bits = np.empty(total_bits, dtype=np.uint8)
        for lo in range(0, n, _CHUNK):
            hi = min(lo + _CHUNK, n)
            bits[lo * width : hi * width] = _values_to_bits(vals[lo:hi], width)
        payload = np.packbits(bits, bitorder="little").tobytes()
        return cls(payload + b"\x00" * _SLACK_BYTES, width, n)

    @classmethod
    def from_payload(cls, payload: bytes, width: int, count: int) -> "PackedArray":
        """Rewrap a serialized payload (slack bytes are re-appended here)."""
        need = (count * width + 7) >> 3
        if len(payload) < need:
            raise CodecError("packed payload shorter than count*width bits")
        return cls(bytes(payload[:need]) + b"\x00" * _SLACK_BYTES, width, count)

    def __len__(self) -> int:
        return self.count

    def get(self, i: int) -> int:
        if i < 0 or i >= self.count:
            raise DomainError(f"index {i} out of range [0, {self.count})")
        bitpos = i * self.width
        return read_bits(self.data, bitpos, self.width)

    def unpack(self, start: int = 0, count: int | None = None) -> np.ndarray:
        """Decode a contiguous range of entries into a uint64 array."""
        if count is None:
            count = self.count - start
        if start < 0 or count < 0 or start + count > self.count:
            raise DomainError("unpack range out of bounds")
        w = self.width
        out = np.empty(count, dtype=np.uint64)
        for lo in range(0, count, _CHUNK):
            hi = min(lo + _CHUNK, count)
            bit0 = (start + lo) * w
            bit1 = (start + hi) * w
            byte0 = bit0 >> 3
            raw = np.frombuffer(self.data, dtype=np.uint8,
                                count=((bit1 + 7) >> 3) - byte0, offset=byte0)
            bits = np.unpackbits(raw, bitorder="little")
            head = bit0 - (byte0 << 3)
            out[lo:hi] = _bits_to_values(bits[head : head + (hi - lo) * w], w)
        return out

    def gather(self, indices) -> np.ndarray:
        """Fetch entries at arbitrary indices, vectorized."""
        idx = np.ascontiguousarray(indices, dtype=np.int64)
        if len(idx) and (int(idx.min()) < 0 or int(idx.max()) >= self.count):
            raise DomainError("gather index out of range")
        buf = np.frombuffer(self.data, dtype=np.uint8)
        w = self.width
        if w <= _SINGLE_LOAD_MAX:
            return read_bits_many(buf, idx * w, w)
        if w == MAX_WIDTH:
            aligned = np.frombuffer(self.data, dtype="<u8", count=self.count)
            return aligned[idx]
        lo = read_bits_many(buf, idx * w, 32)
        hi = read_bits_many(buf, idx * w + 32, w - 32)
        return lo | (hi << np.uint64(32))

    def payload_bytes(self) -> bytes:
        """Payload without the slack tail, for serialization."""
        return self.data[: (self.count * self.width + 7) >> 3]

    @property
    def bit_length(self) -> int:
        return self.count * self.width


def pack_ragged(values, widths) -> tuple[bytes, int]:
    """Pack values with per-value bit widths into one contiguous bit stream.

    Returns (payload bytes with slack tail, total payload bits). Entry i
    occupies bits [sum(widths[:i]), sum(widths[:i+1])).
    """
    vals = np.ascontiguousarray(values, dtype=np.uint64)
    wid = np.ascontiguousarray(widths, dtype=np.int64)
    if len(vals) != len(wid):
        raise DomainError("values and widths length mismatch")
    if len(wid) and (int(wid.min()) < 1 or int(wid.max()) > MAX_WIDTH):
        raise DomainError("ragged widths must be in [1, 64]")
    # capacity check, vectorized: value >> width must be 0 (width 64 exempt)
    if len(vals):
        narrow = wid < MAX_WIDTH
        if (vals[narrow] >> wid[narrow].astype(np.uint64) != 0).any():
            raise CapacityError("ragged value does not fit its width")
    ends = np.cumsum(wid)
    total_bits = int(ends[-1]) if len(wid) else 0
    bits = np.zeros(total_bits, dtype=np.uint8)
    for lo in range(0, len(vals), _CHUNK):
        hi = min(lo + _CHUNK, len(vals))
        w = wid[lo:hi]
        tot = int(w.sum())
        if tot == 0:
            continue
        starts = ends[lo:hi] - w
        k = np.arange(tot, dtype=np.int64) - np.repeat(np.cumsum(w) - w, w)
        pos = np.repeat(starts, w) + k
        bits[pos] = (np.repeat(vals[lo:hi], w) >> k.astype(np.uint64)) & np.uint64(1)
    payload = np.packbits(bits, bitorder="little").tobytes()
    return payload + b"\x00" * _SLACK_BYTES, total_bits


def unpack_ragged(data, bit_starts, widths) -> np.ndarray:
    """Decode entries at explicit bit positions with per-entry widths."""
    starts = np.ascontiguousarray(bit_starts, dtype=np.int64)
    wid = np.ascontiguousarray(widths, dtype=np.int64)
    if len(starts) != len(wid):
        raise DomainError("starts and widths length mismatch")
    out = np.empty(len(wid), dtype=np.uint64)
    buf = np.frombuffer(data, dtype=np.uint8)
    for lo in range(0, len(wid), _CHUNK):
        hi = min(lo + _CHUNK, len(wid))
        w = wid[lo:hi]
        s = starts[lo:hi]
        tot = int(w.sum())
        if tot == 0:
            out[lo:hi] = 0
            continue
        byte0 = int(s.min()) >> 3
        byte1 = (int((s + w).max()) + 7) >> 3
        bits = np.unpackbits(buf[byte0:byte1], bitorder="little")
        k = np.arange(tot, dtype=np.int64) - np.repeat(np.cumsum(w) - w, w)
        pos = np.repeat(s - (byte0 << 3), w) + k
        contrib = bits[pos].astype(np.uint64) << k.astype(np.uint64)
        bound = np.cumsum(w) - w
        out[lo:hi] = np.add.reduceat(contrib, bound)
    return out


def read_bits_many(buf: np.ndarray, positions, width: int) -> np.ndarray:
    """Vectorized read_bits at arbitrary positions; width <= 57.

    `buf` must be a uint8 array with at least 8 slack bytes past the last
    read (PackedArray/pack_ragged payloads guarantee this).
    """
    if width > _SINGLE_LOAD_MAX:
        raise DomainError("read_bits_many supports widths up to 57")
    pos = np.ascontiguousarray(positions, dtype=np.int64)
    addr = pos >> 3
    word = np.zeros(len(pos), dtype=np.uint64)
    for j in range(8):
        word |= buf[addr + j].astype(np.uint64) << np.uint64(8 * j)
    return (word >> (pos & 7).astype(np.uint64)) & np.uint64((1 << width) - 1)


# --- varint (7-bit groups, little-endian, continuation bit 0x80) ---

def varint_encode(value: int) -> bytes:
    if value < 0:
        raise DomainError(f"varint encodes non-negative values, got {value}")
    out = bytearray()
    while True:
        group = value & 0x7F
        value >>= 7
        if value:
            out.append(group | 0x80)
        else:
            out.append(group)
            return bytes(out)


def varint_decode(data, pos: int = 0) -> tuple[int, int]:
    value = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise CodecError("truncated varint")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7
        if shift > 63:
            raise CodecError("varint longer than 10 bytes")


def varint_lengths(values) -> np.ndarray:
    """Encoded byte length of each value's varint, vectorized."""
    v = np.ascontiguousarray(values, dtype=np.uint64)
    out = np.ones(len(v), dtype=np.int64)
    for k in range(1, 10):
        out += v >= np.uint64(1 << (7 * k))
    return out


def varint_encode_array(values) -> np.ndarray:
    """Vectorized varint encoding of a uint64 array; returns a uint8 array."""
    v = np.ascontiguousarray(values, dtype=np.uint64)
    n = len(v)
    if n == 0:
        return np.empty(0, dtype=np.uint8)
    nbytes = varint_lengths(v)
    ends = np.cumsum(nbytes)
    starts = ends - nbytes
    out = np.zeros(int(ends[-1]), dtype=np.uint8)
    for k in range(10):
        sel = nbytes > k
        if not sel.any():
            break
        group = (v[sel] >> np.uint64(7 * k)) & np.uint64(0x7F)
        cont = (nbytes[sel] - 1 > k).astype(np.uint8) << 7
        out[starts[sel] + k] = group.astype(np.uint8) | cont
    return out


def varint_decode_stream(buf) -> tuple[np.ndarray, np.ndarray]:
    """Decode a whole stream of varints.

    Returns (values, end_offsets) where end_offsets[i] is the byte offset one
    past value i; both are empty when the buffer is.  The value dtype is an
    unsigned integer wide enough for the longest code in the stream, not
    necessarily uint64.
    """
    b = np.ascontiguousarray(buf, dtype=np.uint8)
    if len(b) == 0:
        return np.empty(0, dtype=np.uint64), np.empty(0, dtype=np.int64)
    is_last = (b & 0x80) == 0
    if not is_last[-1]:
        raise CodecError("truncated varint at end of stream")
    ends = np.flatnonzero(is_last) + 1
    starts = np.empty_like(ends)
    starts[0] = 0
    starts[1:] = ends[:-1]
    lengths = ends - starts
    if int(lengths.max()) > 10:
        raise CodecError("varint longer than 10 bytes")
    # accumulate 7-bit groups value by value; round k only touches the
    # varints that still have a k-th byte, so short codes finish early.
    # Values of at most 4 bytes fit in 28 bits, so a uint32 accumulator is
    # safe there and halves the memory traffic on the common small-gap case.
    acc = np.uint32 if int(lengths.max()) <= 4 else np.uint64
    values = (b[starts] & np.uint8(0x7F)).astype(acc)
    live = np.flatnonzero(lengths > 1)
    k = 1
    while len(live):
        group = (b[starts[live] + k] & np.uint8(0x7F)).astype(acc)
        values[live] |= group << acc(7 * k)
        k += 1
        live = live[lengths[live] > k]
    return values, ends


# --- zigzag mapping for signed gaps ---

def zigzag_encode(k: int) -> int:
    return 2 * k if k >= 0 else -2 * k - 1


def zigzag_decode(u: int) -> int:
    return (u >> 1) if u % 2 == 0 else -(u >> 1) - 1


def zigzag_encode_array(k) -> np.ndarray:
    a = np.ascontiguousarray(k, dtype=np.int64)
    return np.where(a >= 0, 2 * a, -2 * a - 1).astype(np.uint64)


def zigzag_decode_array(u) -> np.ndarray:
    a = np.ascontiguousarray(u, dtype=np.uint64)
    half = (a >> np.uint64(1)).astype(np.int64)
    return np.where(a & np.uint64(1), -half - 1, half)
