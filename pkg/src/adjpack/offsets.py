"""Offset structures: pointer arrays and rank/select bit vectors.

A pointer array stores n+1 absolute neighborhood boundaries directly. A bit
vector marks which B-bit payload blocks begin a nonempty neighborhood; the
start of the j-th nonempty neighborhood is select(j) and its end is the next
set bit, which works for the last one too because a sentinel bit is set one
block past the payload end.

Three bit-vector flavors trade space for query cost: plain (select samples
every 512th set bit, linear-scan rank), interleaved (a 64-bit running
popcount per 512 payload bits), and sparse (Elias-Fano over the set-bit
positions, for payloads much longer than the number of neighborhoods).

All structures are immutable after construction and safe for concurrent
readers. Bit positions up to 2^32 are supported.
"""

from __future__ import annotations

import numpy as np

from .bitio import PackedArray, bits_for
from .errors import CapacityError, DomainError

POINTER_KINDS = ("ptr32", "ptr64", "ptrlogn")
BITVECTOR_KINDS = ("bvpl", "bvil", "bvsd")

_PL_SAMPLE = 512  # select sample rate, plain flavor
_EF_SAMPLE = 64  # select sample rate inside the Elias-Fano high part
IL_PERIOD = 512  # bits covered by each interleaved counter
_BULK_FACTOR = 128  # select_many switches to a full decode past this ratio


def _words_from_positions(positions, length: int) -> np.ndarray:
    bits = np.zeros(length, dtype=np.uint8)
    if len(positions):
        bits[positions] = 1
    packed = np.packbits(bits, bitorder="little")
    nwords = (length + 63) >> 6
    buf = np.zeros(nwords * 8, dtype=np.uint8)
    buf[: len(packed)] = packed
    return buf.view(np.uint64)


def _positions_from_words(words: np.ndarray, length: int) -> np.ndarray:
    bits = np.unpackbits(words.view(np.uint8), bitorder="little", count=length)
    return np.flatnonzero(bits).astype(np.int64)


def _nth_set_bit(word: int, k: int) -> int:
    """Position of the k-th (1-based) set bit of a word; caller checks k."""
    for _ in range(k - 1):
        word &= word - 1
    return (word & -word).bit_length() - 1


def _check_select_arg(j: int, ones: int):
    if j < 1 or j > ones:
        raise DomainError(f"select index {j} out of range [1, {ones}]")


class PlainBitVector:
    """Uncompressed bit vector; O(1)-ish select via samples, linear rank."""

    kind = "bvpl"

    def __init__(self, words, length, ones, samples):
        self.words = words
        self.length = length
        self.ones = ones
        self.samples = samples

    @classmethod
    def from_positions(cls, positions, length: int) -> "PlainBitVector":
        if length >= 1 << 32:
            raise CapacityError("bit vector longer than 2^32 bits")
        positions = np.ascontiguousarray(positions, dtype=np.int64)
        words = _words_from_positions(positions, length)
        samples = positions[::_PL_SAMPLE].astype(np.uint32)
        return cls(words, length, len(positions), samples)

    def rank(self, x: int) -> int:
        """Count of set bits in positions [0..x]."""
        if x < 0:
            return 0
        x = min(x, self.length - 1)
        wx = x >> 6
        full = int(np.bitwise_count(self.words[:wx]).sum()) if wx else 0
        partial = int(self.words[wx]) & ((1 << ((x & 63) + 1)) - 1)
        return full + partial.bit_count()

    def select(self, j: int) -> int:
        """Position of the j-th (1-based) set bit."""
        _check_select_arg(j, self.ones)
        s = (j - 1) // _PL_SAMPLE
        p = int(self.samples[s])
        need = j - s * _PL_SAMPLE  # ones still to find, counting the sample
        if need == 1:
            return p
        wi = p >> 6
        word = int(self.words[wi]) & ~((2 << (p & 63)) - 1)
        need -= 1
        while True:
            c = word.bit_count()
            if c >= need:
                return (wi << 6) + _nth_set_bit(word, need)
            need -= c
            wi += 1
            word = int(self.words[wi])

    def positions(self) -> np.ndarray:
        pos = getattr(self, "_pos_cache", None)
        if pos is None:
            pos = _positions_from_words(self.words, self.length)
            self._pos_cache = pos
        return pos

    def select_many(self, js) -> np.ndarray:
        js = np.ascontiguousarray(js, dtype=np.int64)
        if len(js) == 0:
            return np.empty(0, dtype=np.int64)
        if int(js.min()) < 1 or int(js.max()) > self.ones:
            raise DomainError("select index out of range")
        if len(js) * _BULK_FACTOR >= self.length:
            return self.positions()[js - 1]
        return np.array([self.select(int(j)) for j in js], dtype=np.int64)

    def size_report(self) -> dict:
        return {
            "kind": self.kind,
            "raw_bits": self.length,
            "aux_bits": 32 * len(self.samples),
        }


class InterleavedBitVector:
    """Bit vector with a running popcount stored every IL_PERIOD bits."""

    kind = "bvil"

    def __init__(self, words, length, ones, cums):
        self.words = words
        self.length = length
        self.ones = ones
        self.cums = cums  # cums[i] = ones before bit i*IL_PERIOD

    @classmethod
    def from_positions(cls, positions, length: int) -> "InterleavedBitVector":
        if length >= 1 << 32:
            raise CapacityError("bit vector longer than 2^32 bits")
        positions = np.ascontiguousarray(positions, dtype=np.int64)
        words = _words_from_positions(positions, length)
        wpb = IL_PERIOD >> 6
        nblocks = max(1, (len(words) + wpb - 1) // wpb)
        counts = np.bitwise_count(words).astype(np.int64)
        block_tot = np.add.reduceat(counts, np.arange(0, len(words), wpb)) \
            if len(words) else np.zeros(1, dtype=np.int64)
        cums = np.zeros(nblocks, dtype=np.uint64)
        np.cumsum(block_tot[: nblocks - 1], out=cums[1:])
        return cls(words, length, len(positions), cums)

    def rank(self, x: int) -> int:
        if x < 0:
            return 0
        x = min(x, self.length - 1)
        b = x >> 9
        w0 = b * (IL_PERIOD >> 6)
        wx = x >> 6
        total = int(self.cums[b])
        if wx > w0:
            total += int(np.bitwise_count(self.words[w0:wx]).sum())
        partial = int(self.words[wx]) & ((1 << ((x & 63) + 1)) - 1)
        return total + partial.bit_count()

    def select(self, j: int) -> int:
        _check_select_arg(j, self.ones)
        b = int(np.searchsorted(self.cums, j, side="left")) - 1
        need = j - int(self.cums[b])
        wi = b * (IL_PERIOD >> 6)
        while True:
            word = int(self.words[wi])
            c = word.bit_count()
            if c >= need:
                return (wi << 6) + _nth_set_bit(word, need)
            need -= c
            wi += 1

    def positions(self) -> np.ndarray:
        pos = getattr(self, "_pos_cache", None)
        if pos is None:
            pos = _positions_from_words(self.words, self.length)
            self._pos_cache = pos
        return pos

    def select_many(self, js) -> np.ndarray:
        js = np.ascontiguousarray(js, dtype=np.int64)
        if len(js) == 0:
            return np.empty(0, dtype=np.int64)
        if int(js.min()) < 1 or int(js.max()) > self.ones:
            raise DomainError("select index out of range")
        if len(js) * _BULK_FACTOR >= self.length:
            return self.positions()[js - 1]
        return np.array([self.select(int(j)) for j in js], dtype=np.int64)

    def size_report(self) -> dict:
        return {
            "kind": self.kind,
            "raw_bits": self.length,
            "aux_bits": 64 * len(self.cums),
        }


class SparseBitVector:
    """Elias-Fano coded set of positions.

    Low floor(log2(length/ones)) bits of each position are stored packed; the
    high parts become unary bucket counts in a dense bit vector where the
    i-th set bit sits at high_i + i, so select is a sampled scan and rank a
    binary search over select.
    """

    kind = "bvsd"

    def __init__(self, length, ones, low, low_width, upper_words, upper_len, usamples):
        self.length = length
        self.ones = ones
        self.low = low  # PackedArray or None when low_width == 0
        self.low_width = low_width
        self.upper_words = upper_words
        self.upper_len = upper_len
        self.usamples = usamples

    @classmethod
    def from_positions(cls, positions, length: int) -> "SparseBitVector":
        if length >= 1 << 32:
            raise CapacityError("bit vector longer than 2^32 bits")
        positions = np.ascontiguousarray(positions, dtype=np.int64)
        k = len(positions)
        if k == 0:
            return cls(length, 0, None, 0, np.zeros(1, dtype=np.uint64), 0,
                       np.empty(0, dtype=np.uint32))
        lw = max(0, (length // k).bit_length() - 1)
        low = None
        if lw:
            low = PackedArray.pack(positions & ((1 << lw) - 1), lw)
        upper_pos = (positions >> lw) + np.arange(k, dtype=np.int64)
        upper_len = int(upper_pos[-1]) + 1
        upper_words = _words_from_positions(upper_pos, upper_len)
        usamples = upper_pos[::_EF_SAMPLE].astype(np.uint32)
        return cls(length, k, low, lw, upper_words, upper_len, usamples)

    def _upper_select(self, j: int) -> int:
        s = (j - 1) // _EF_SAMPLE
        p = int(self.usamples[s])
        need = j - s * _EF_SAMPLE
        if need == 1:
            return p
        wi = p >> 6
        word = int(self.upper_words[wi]) & ~((2 << (p & 63)) - 1)
        need -= 1
        while True:
            c = word.bit_count()
            if c >= need:
                return (wi << 6) + _nth_set_bit(word, need)
            need -= c
            wi += 1
            word = int(self.upper_words[wi])

    def select(self, j: int) -> int:
        _check_select_arg(j, self.ones)
        high = self._upper_select(j) - (j - 1)
        lowbits = self.low.get(j - 1) if self.low is not None else 0
        return (high << self.low_width) | lowbits

    def rank(self, x: int) -> int:
        if x < 0 or self.ones == 0:
            return 0
        lo, hi = 1, self.ones
        while lo <= hi:
            mid = (lo + hi) // 2
            if self.select(mid) <= x:
                lo = mid + 1
            else:
                hi = mid - 1
        return hi

    def positions(self) -> np.ndarray:
        if self.ones == 0:
            return np.empty(0, dtype=np.int64)
        pos = getattr(self, "_pos_cache", None)
        if pos is None:
            upper_pos = _positions_from_words(self.upper_words, self.upper_len)
            highs = upper_pos - np.arange(self.ones, dtype=np.int64)
            pos = highs << self.low_width
            if self.low is not None:
                pos |= self.low.unpack().astype(np.int64)
            self._pos_cache = pos
        return pos

    def select_many(self, js) -> np.ndarray:
        js = np.ascontiguousarray(js, dtype=np.int64)
        if len(js) == 0:
            return np.empty(0, dtype=np.int64)
        if int(js.min()) < 1 or int(js.max()) > self.ones:
            raise DomainError("select index out of range")
        if len(js) * _BULK_FACTOR >= self.upper_len:
            return self.positions()[js - 1]
        return np.array([self.select(int(j)) for j in js], dtype=np.int64)

    def size_report(self) -> dict:
        low_bits = self.low.bit_length if self.low is not None else 0
        return {
            "kind": self.kind,
            "raw_bits": low_bits + self.upper_len,
            "aux_bits": 32 * len(self.usamples),
        }


_BV_CLASSES = {
    "bvpl": PlainBitVector,
    "bvil": InterleavedBitVector,
    "bvsd": SparseBitVector,
}


class RankBits:
    """Plain bits over the vertices with O(1) exclusive rank.

    Used as the side structure marking which vertices have nonzero degree;
    the directory stores a 32-bit running count every 512 bits.
    """

    def __init__(self, words, n, cums):
        self.words = words
        self.n = n
        self.cums = cums

    @classmethod
    def from_flags(cls, flags) -> "RankBits":
        flags = np.ascontiguousarray(flags, dtype=np.uint8)
        n = len(flags)
        packed = np.packbits(flags, bitorder="little")
        nwords = max(1, (n + 63) >> 6)
        buf = np.zeros(nwords * 8, dtype=np.uint8)
        buf[: len(packed)] = packed
        words = buf.view(np.uint64)
        wpb = 512 >> 6
        nblocks = (nwords + wpb - 1) // wpb + 1
        counts = np.bitwise_count(words).astype(np.int64)
        block_tot = np.add.reduceat(counts, np.arange(0, nwords, wpb))
        cums = np.zeros(nblocks, dtype=np.uint32)
        np.cumsum(block_tot, out=cums[1 : len(block_tot) + 1])
        if len(block_tot) + 1 < nblocks:
            cums[len(block_tot) + 1 :] = cums[len(block_tot)]
        return cls(words, n, cums)

    def get(self, v: int) -> int:
        return (int(self.words[v >> 6]) >> (v & 63)) & 1

    def rank_excl(self, v: int) -> int:
        """Count of set flags at positions < v."""
        if v <= 0:
            return 0
        v = min(v, self.n)
        b = v >> 9
        w0 = b * 8
        wx = v >> 6
        total = int(self.cums[b])
        if wx > w0:
            total += int(np.bitwise_count(self.words[w0:wx]).sum())
        if wx < len(self.words) and v & 63:
            partial = int(self.words[wx]) & ((1 << (v & 63)) - 1)
            total += partial.bit_count()
        return total

    def rank_excl_many(self, vs) -> np.ndarray:
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        out = self.cums[vs >> 9].astype(np.int64)
        wx = vs >> 6
        base = (vs >> 9) * 8
        for s in range(8):
            wi = base + s
            live = wi < wx
            if not live.any():
                break
            gathered = self.words[np.minimum(wi, len(self.words) - 1)]
            out += np.where(live, np.bitwise_count(gathered).astype(np.int64), 0)
        shift = (vs & 63).astype(np.uint64)
        mask = (np.uint64(1) << shift) - np.uint64(1)
        inb = wx < len(self.words)
        pw = self.words[np.minimum(wx, len(self.words) - 1)] & mask
        out += np.where(inb, np.bitwise_count(pw).astype(np.int64), 0)
        return out

    def get_many(self, vs) -> np.ndarray:
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        return ((self.words[vs >> 6] >> (vs & 63).astype(np.uint64)) & np.uint64(1)).astype(np.int64)

    def flags(self) -> np.ndarray:
        return np.unpackbits(self.words.view(np.uint8), bitorder="little",
                             count=self.n).astype(bool)

    def size_report(self) -> dict:
        return {"raw_bits": self.n, "aux_bits": 32 * len(self.cums)}


class OffsetArray:
    """Pointer-array offsets: n+1 absolute boundaries at a fixed width.

    `unit` records what the boundaries count: "neighbor" positions for
    uniform-stride payloads, raw "bit" positions for variable-width ones.
    """

    def __init__(self, kind, entries: PackedArray, unit: str):
        self.kind = kind
        self.entries = entries
        self.unit = unit

    @property
    def n(self) -> int:
        return self.entries.count - 1

    @property
    def total(self) -> int:
        return self.entries.get(self.entries.count - 1)

    def offset_of(self, v: int) -> int:
        return self.entries.get(v)

    def span(self, v: int) -> tuple[int, int]:
        return self.entries.get(v), self.entries.get(v + 1)

    def boundaries(self) -> np.ndarray:
        return self.entries.unpack().astype(np.int64)

    def size_report(self) -> dict:
        width = self.entries.width
        raw = (self.n + 1) * width
        if self.kind == "ptrlogn":
            formula = self.n * width  # final boundary itemized separately
            items = {"final_entry_bits": width}
        else:
            formula = raw
            items = {}
        return {"kind": self.kind, "raw_bits": raw, "aux_bits": 0,
                "formula_bits": formula, "items": items}


def build_offset_array(kind: str, boundaries, unit: str = "neighbor") -> OffsetArray:
    """Pack n+1 monotone boundaries at the width the kind dictates."""
    if kind not in POINTER_KINDS:
        raise DomainError(f"unknown pointer kind {kind!r}")
    bnd = np.ascontiguousarray(boundaries, dtype=np.int64)
    if len(bnd) == 0 or bnd[0] != 0 or (np.diff(bnd) < 0).any():
        raise DomainError("boundaries must start at 0 and be non-decreasing")
    top = int(bnd[-1])
    if kind == "ptr32":
        if top >= 1 << 32:
            raise CapacityError(f"total {top} does not fit 32-bit offsets")
        width = 32
    elif kind == "ptr64":
        width = 64
    else:
        width = bits_for(top)
    return OffsetArray(kind, PackedArray.pack(bnd, width), unit)


class OffsetBitVector:
    """Bit-vector offsets over B-bit payload blocks with an end sentinel.

    Set bit j (1-based) marks where the j-th nonempty neighborhood starts;
    the final set bit sits one block past the payload, so spans are always
    select(j) .. select(j+1).
    """

    def __init__(self, flavor, bv, block_bits, payload_bits, n_vertices):
        self.flavor = flavor
        self.bv = bv
        self.block_bits = block_bits
        self.payload_bits = payload_bits
        self.n_vertices = n_vertices

    @property
    def nonempty_count(self) -> int:
        return self.bv.ones - 1  # minus the sentinel

    def start_bit(self, ordinal: int) -> int:
        """Bit offset of the ordinal-th (1-based) nonempty neighborhood."""
        return self.bv.select(ordinal) * self.block_bits

    def span_bits(self, ordinal: int) -> tuple[int, int]:
        return (self.bv.select(ordinal) * self.block_bits,
                self.bv.select(ordinal + 1) * self.block_bits)

    def starts_many(self, ordinals) -> np.ndarray:
        return self.bv.select_many(ordinals) * self.block_bits

    def size_report(self) -> dict:
        rep = self.bv.size_report()
        n = self.n_vertices
        blocks = self.payload_bits // self.block_bits
        if self.flavor == "bvpl":
            formula = float(blocks)
        elif self.flavor == "bvil":
            formula = blocks * (1.0 + 64.0 / IL_PERIOD)
        else:
            ratio = blocks / n if n else 1.0
            formula = n * (2.0 + (np.log2(ratio) if ratio > 0 else 0.0))
        rep.update({
            "formula_bits": formula,
            "items": {"sentinel_bits": 1, "payload_blocks": blocks},
        })
        return rep


def build_bitvector(start_bits, payload_bits: int, block_bits: int, flavor: str,
                    n_vertices: int) -> OffsetBitVector:
    """Build offsets from nonempty-neighborhood bit starts.

    Every start and the payload length must be multiples of block_bits; a
    sentinel set bit is appended at the block one past the payload.
    """
    if flavor not in BITVECTOR_KINDS:
        raise DomainError(f"unknown bit-vector flavor {flavor!r}")
    if block_bits < 1:
        raise DomainError("block_bits must be >= 1")
    starts = np.ascontiguousarray(start_bits, dtype=np.int64)
    if payload_bits % block_bits:
        raise DomainError("payload length not a multiple of the block size")
    if len(starts):
        if (starts % block_bits).any():
            raise DomainError("neighborhood start not aligned to the block size")
        if (np.diff(starts) <= 0).any() or starts[0] != 0:
            raise DomainError("starts must be strictly increasing from 0")
        if int(starts[-1]) >= payload_bits:
            raise DomainError("start beyond payload end")
    blocks = payload_bits // block_bits
    positions = np.concatenate([starts // block_bits, [blocks]])
    bv = _BV_CLASSES[flavor].from_positions(positions, blocks + 1)
    return OffsetBitVector(flavor, bv, block_bits, payload_bits, n_vertices)


# --- serialization helpers (the container stores these parts verbatim) ---

def bitvector_to_parts(obv: OffsetBitVector) -> dict:
    bv = obv.bv
    parts = {
        "flavor": obv.flavor,
        "block_bits": obv.block_bits,
        "payload_bits": obv.payload_bits,
        "n_vertices": obv.n_vertices,
        "length": bv.length,
        "ones": bv.ones,
    }
    if obv.flavor in ("bvpl", "bvil"):
        parts["words"] = bv.words.tobytes()
    else:
        parts["low_width"] = bv.low_width
        parts["low"] = bv.low.payload_bytes() if bv.low is not None else b""
        parts["upper"] = bv.upper_words.tobytes()
        parts["upper_len"] = bv.upper_len
    return parts


def bitvector_from_parts(parts: dict) -> OffsetBitVector:
    flavor = parts["flavor"]
    length = parts["length"]
    ones = parts["ones"]
    if flavor in ("bvpl", "bvil"):
        words = np.frombuffer(parts["words"], dtype="<u8")
        positions = _positions_from_words(words, length)
        if len(positions) != ones:
            raise DomainError("bit vector parts disagree on set-bit count")
        bv = _BV_CLASSES[flavor].from_positions(positions, length)
    else:
        lw = parts["low_width"]
        low = PackedArray.from_payload(parts["low"], lw, ones) if lw else None
        upper = np.frombuffer(parts["upper"], dtype="<u8")
        upper_len = parts["upper_len"]
        if ones:
            upper_pos = _positions_from_words(upper, upper_len)
            usamples = upper_pos[::_EF_SAMPLE].astype(np.uint32)
        else:
            usamples = np.empty(0, dtype=np.uint32)
        bv = SparseBitVector(length, ones, low, lw, upper, upper_len, usamples)
    return OffsetBitVector(flavor, bv, parts["block_bits"],
                           parts["payload_bits"], parts["n_vertices"])


def rankbits_to_parts(rb: RankBits) -> dict:
    return {"n": rb.n, "words": rb.words.tobytes()}


def rankbits_from_parts(parts: dict) -> RankBits:
    words = np.frombuffer(parts["words"], dtype="<u8")
    flags = np.unpackbits(words.view(np.uint8), bitorder="little",
                          count=parts["n"])
    return RankBits.from_flags(flags)
