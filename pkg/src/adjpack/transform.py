"""Adjacency payload encoders.

Three families share one intermediate form, a flat stream of (value, width)
fields concatenated vertex by vertex:

* fixed-width: every entry of a neighborhood takes the same number of bits,
  chosen globally or per neighborhood, storing absolute IDs or gaps, with
  optional interleaved weights (the `FineScheme` combinations);
* varint: each ID or gap becomes a little-endian base-128 byte sequence, so
  every field is 8 bits wide;
* block-grouped (brb): neighbors are grouped by the partition block their ID
  falls in, and each group stores the block index, a varint count, and the
  short within-block remainders.

Because the intermediate form is uniform, packing and unpacking go through
the same ragged bit routines regardless of scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitio import (bits_for_array, pack_ragged, read_bits, read_bits_many,
                    unpack_ragged, varint_decode_stream, varint_encode_array,
                    varint_lengths, zigzag_decode, zigzag_decode_array)
from .errors import CodecError, ConfigError
from .finelog import (WEIGHT_MODES, FineContext, FineScheme, all_gap_values,
                      header_field_bits)
from .graph import AdjacencyGraph
from .permute import BrbLabeling

FIXED_KINDS = ("global", "local", "global-gap", "local-gap")
VARINT_KINDS = ("varint-gap", "varint-full")
ADJACENCY_KINDS = FIXED_KINDS + VARINT_KINDS + ("brb",)

_FINE_BY_KIND = {
    "global": ("global", "absolute"),
    "local": ("local", "absolute"),
    "global-gap": ("global", "fixed_gap"),
    "local-gap": ("local", "fixed_gap"),
}


@dataclass(frozen=True)
class TransformScheme:
    """What the adjacency payload stores and how wide its fields are."""

    kind: str = "global"
    weight_mode: str = "none"

    def validate(self):
        if self.kind not in ADJACENCY_KINDS:
            raise ConfigError(
                f"unknown adjacency kind {self.kind!r}; "
                f"valid kinds are {', '.join(ADJACENCY_KINDS)}")
        if self.weight_mode not in WEIGHT_MODES:
            raise ConfigError(f"weight_mode must be one of {WEIGHT_MODES}")
        if self.weight_mode != "none" and self.kind not in FIXED_KINDS:
            raise ConfigError(
                f"adjacency kind {self.kind!r} stores IDs only; weighted "
                f"graphs need one of {', '.join(FIXED_KINDS)}")

    @property
    def fixed(self) -> bool:
        return self.kind in FIXED_KINDS

    @property
    def gaps(self) -> bool:
        return self.kind in ("global-gap", "local-gap", "varint-gap")

    @property
    def local_ids(self) -> bool:
        return self.kind in ("local", "local-gap")

    @property
    def weighted(self) -> bool:
        return self.weight_mode != "none"

    @property
    def fine(self) -> FineScheme:
        if not self.fixed:
            raise ConfigError(f"{self.kind!r} has no fixed-width scheme")
        idm, gm = _FINE_BY_KIND[self.kind]
        return FineScheme(idm, gm, self.weight_mode)


@dataclass
class EncodedAdjacency:
    """Flat field stream for a whole graph, ready for ragged packing.

    values[i] occupies widths[i] bits; vertex v owns the slice of
    value_counts[v] consecutive fields, bit_lengths[v] bits in total.
    """

    scheme: TransformScheme
    n: int
    values: np.ndarray  # uint64
    widths: np.ndarray  # int64, same length
    value_counts: np.ndarray  # int64, per vertex
    bit_lengths: np.ndarray  # int64, per vertex
    ctx: FineContext
    id_widths: np.ndarray | None = None  # per vertex, local kinds only
    wt_widths: np.ndarray | None = None  # per vertex, local_width only

    def pack(self) -> tuple[bytes, int]:
        return pack_ragged(self.values, self.widths)


def _ragged_arange(lengths: np.ndarray) -> np.ndarray:
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    ends = np.cumsum(lengths)
    return np.arange(total, dtype=np.int64) - np.repeat(ends - lengths, lengths)


def _per_vertex_sums(per_entry: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    # segment sums that stay correct across empty segments
    cum = np.zeros(len(per_entry) + 1, dtype=np.int64)
    np.cumsum(per_entry, out=cum[1:])
    return cum[offsets[1:]] - cum[offsets[:-1]]


def make_context(g: AdjacencyGraph, scheme: TransformScheme) -> FineContext:
    gap_max = 0
    if scheme.kind == "global-gap":
        offsets, neighbors, _ = g.adjacency_all()
        if len(neighbors):
            gap_max = int(all_gap_values(offsets, neighbors).max())
    return FineContext(n=g.n, max_weight=g.max_weight if g.weighted else 0,
                       global_gap_max=gap_max)


def encode_adjacency(g: AdjacencyGraph, scheme: TransformScheme,
                     brb: BrbLabeling | None = None) -> EncodedAdjacency:
    """Encode a whole adjacency into the flat field stream."""
    scheme.validate()
    if scheme.weighted and not g.weighted:
        raise ConfigError("weighted scheme on an unweighted graph")
    ctx = make_context(g, scheme)
    if scheme.fixed:
        return _encode_fixed(g, scheme, ctx)
    if scheme.kind in VARINT_KINDS:
        return _encode_varint(g, scheme, ctx)
    return _encode_brb(g, scheme, ctx, brb)


def _encode_fixed(g, scheme, ctx) -> EncodedAdjacency:
    offsets, neighbors, weights = g.adjacency_all()
    n = g.n
    deg = np.diff(offsets)
    nz = deg > 0
    starts = offsets[:-1][nz]

    if scheme.gaps:
        idvals = all_gap_values(offsets, neighbors)
    else:
        idvals = neighbors.astype(np.uint64)

    id_w = np.ones(n, dtype=np.int64)
    id_widths = None
    if scheme.local_ids:
        if nz.any():
            id_w[nz] = bits_for_array(np.maximum.reduceat(idvals, starts))
        id_widths = id_w
    else:
        id_w[:] = ctx.global_gap_width if scheme.gaps else ctx.global_id_width

    wt_w = np.zeros(n, dtype=np.int64)
    wt_widths = None
    if scheme.weighted:
        if scheme.weight_mode == "global_width":
            wt_w[:] = ctx.global_weight_width
        else:
            wt_w[:] = 1
            if nz.any():
                wt_w[nz] = bits_for_array(np.maximum.reduceat(weights, starts))
            wt_widths = wt_w

    if scheme.weighted:
        values = np.empty(2 * len(idvals), dtype=np.uint64)
        values[0::2] = idvals
        values[1::2] = weights.astype(np.uint64)
        widths = np.empty(len(values), dtype=np.int64)
        widths[0::2] = np.repeat(id_w, deg)
        widths[1::2] = np.repeat(wt_w, deg)
        value_counts = 2 * deg
    else:
        values = idvals
        widths = np.repeat(id_w, deg)
        value_counts = deg.copy()
    bit_lengths = deg * (id_w + wt_w)
    return EncodedAdjacency(scheme, n, values, widths, value_counts,
                            bit_lengths, ctx, id_widths, wt_widths)


def _encode_varint(g, scheme, ctx) -> EncodedAdjacency:
    offsets, neighbors, _ = g.adjacency_all()
    if scheme.gaps:
        vals = all_gap_values(offsets, neighbors)
    else:
        vals = neighbors.astype(np.uint64)
    byte_lens = varint_lengths(vals)
    stream = varint_encode_array(vals)
    values = stream.astype(np.uint64)
    widths = np.full(len(values), 8, dtype=np.int64)
    byte_counts = _per_vertex_sums(byte_lens, offsets)
    return EncodedAdjacency(scheme, g.n, values, widths, byte_counts,
                            8 * byte_counts, ctx)


def _encode_brb(g, scheme, ctx, brb: BrbLabeling | None) -> EncodedAdjacency:
    if brb is None:
        raise ConfigError("brb adjacency needs the block labeling that "
                          "produced the vertex order")
    n = g.n
    if int(brb.part_start[-1]) != n:
        raise ConfigError("block labeling does not cover this graph")
    offsets, neighbors, _ = g.adjacency_all()
    deg = np.diff(offsets)
    k = brb.depth
    sw = brb.suffix_width

    pe = np.searchsorted(brb.part_start, neighbors, side="right") - 1
    se = (neighbors - brb.part_start[pe]).astype(np.uint64)
    rid = np.repeat(np.arange(n, dtype=np.int64), deg)

    m2 = len(neighbors)
    gs = np.ones(m2, dtype=bool)
    if m2 > 1:
        gs[1:] = (pe[1:] != pe[:-1]) | (rid[1:] != rid[:-1])
    gidx = np.flatnonzero(gs)
    counts = np.diff(np.append(gidx, m2))
    group_prefix = pe[gidx].astype(np.uint64)
    group_row = rid[gidx]

    count_bytes = varint_encode_array(counts.astype(np.uint64))
    clens = varint_lengths(counts.astype(np.uint64))

    per_group_values = 1 + clens + counts
    gstart = np.cumsum(per_group_values) - per_group_values
    total = int(per_group_values.sum())
    values = np.zeros(total, dtype=np.uint64)
    widths = np.empty(total, dtype=np.int64)

    values[gstart] = group_prefix
    widths[gstart] = k
    cpos = np.repeat(gstart + 1, clens) + _ragged_arange(clens)
    values[cpos] = count_bytes
    widths[cpos] = 8
    spos = np.repeat(gstart + 1 + clens, counts) + _ragged_arange(counts)
    values[spos] = se
    widths[spos] = sw

    value_counts = np.zeros(n, dtype=np.int64)
    np.add.at(value_counts, group_row, per_group_values)
    per_group_bits = k + 8 * clens + sw * counts
    bit_lengths = np.zeros(n, dtype=np.int64)
    np.add.at(bit_lengths, group_row, per_group_bits)
    return EncodedAdjacency(scheme, n, values, widths, value_counts,
                            bit_lengths, ctx)


# --- decoding ---
#
# Decoders take the packed payload (a uint8 array that keeps the 8 slack
# bytes from pack_ragged) plus explicit per-vertex extents, because where a
# neighborhood starts and ends is the offset structure's business.

def decode_fixed_batch(buf: np.ndarray, start_bits, degrees, id_w, wt_w,
                       gaps: bool, vs) -> tuple[np.ndarray, np.ndarray | None]:
    """Decode fixed-width neighborhoods for a batch of vertices.

    id_w/wt_w are per-row field widths (wt_w all zeros when unweighted);
    vs carries the vertex labels the first-gap values are relative to.
    Returns (ids, weights or None) concatenated in batch order.
    """
    start_bits = np.ascontiguousarray(start_bits, dtype=np.int64)
    degrees = np.ascontiguousarray(degrees, dtype=np.int64)
    id_w = np.ascontiguousarray(id_w, dtype=np.int64)
    wt_w = np.ascontiguousarray(wt_w, dtype=np.int64)
    stride = id_w + wt_w
    entry_pos = (np.repeat(start_bits, degrees)
                 + _ragged_arange(degrees) * np.repeat(stride, degrees))
    raw = unpack_ragged(buf, entry_pos, np.repeat(id_w, degrees))
    weights = None
    if wt_w.any():
        weights = unpack_ragged(buf, entry_pos + np.repeat(id_w, degrees),
                                np.repeat(wt_w, degrees)).astype(np.int64)
    if not gaps:
        return raw.astype(np.int64), weights
    return _undo_gaps(raw, degrees, vs), weights


def _undo_gaps(raw: np.ndarray, degrees: np.ndarray, vs) -> np.ndarray:
    """Rebuild absolute IDs from per-row gap values (zigzag first, diffs after)."""
    vals = raw.astype(np.int64)
    if len(vals) == 0:
        return vals
    vs = np.ascontiguousarray(vs, dtype=np.int64)
    nz = degrees > 0
    starts_idx = (np.cumsum(degrees) - degrees)[nz]
    firsts = vs[nz] + zigzag_decode_array(raw[starts_idx])
    vals[starts_idx] = firsts
    np.cumsum(vals, out=vals)
    base = vals[starts_idx] - firsts
    np.subtract(vals, np.repeat(base, degrees[nz]), out=vals)
    return vals


def read_fixed_entry(buf, start_bit: int, i: int, id_w: int, wt_w: int,
                     want_weight: bool = False) -> int:
    """Random access to entry i of a fixed-width neighborhood (absolute IDs)."""
    pos = start_bit + i * (id_w + wt_w)
    if want_weight:
        return read_bits(buf, pos + id_w, wt_w)
    return read_bits(buf, pos, id_w)


def decode_varint_batch(buf: np.ndarray, byte_starts, byte_ends, gaps: bool,
                        vs) -> tuple[np.ndarray, np.ndarray]:
    """Decode byte-aligned varint neighborhoods.

    Returns (row_counts, ids); row_counts[i] is the degree of batch row i.
    """
    byte_starts = np.ascontiguousarray(byte_starts, dtype=np.int64)
    byte_ends = np.ascontiguousarray(byte_ends, dtype=np.int64)
    lens = byte_ends - byte_starts
    total = int(lens.sum())
    if total == 0:
        return np.zeros(len(byte_starts), dtype=np.int64), np.empty(0, np.int64)
    # build the gather index as one in-place cumsum: step is 1 inside a row
    # and jumps to the next row's start byte at each boundary
    idx_t = np.int32 if len(buf) < 2**31 else np.int64
    step = np.ones(total, dtype=idx_t)
    nz = np.flatnonzero(lens)
    bounds_nz = np.cumsum(lens[nz])
    step[0] = byte_starts[nz[0]]
    step[bounds_nz[:-1]] = byte_starts[nz[1:]] - byte_ends[nz[:-1]] + 1
    pos = np.cumsum(step, out=step)
    stream = buf[pos]
    is_last = (stream & 0x80) == 0
    # a row may only hold whole varints, so the byte before each nonempty
    # row's boundary must be a terminator (empty rows share the previous
    # boundary, which the induction already covers)
    bounds = np.cumsum(lens)
    if not is_last[bounds[lens > 0] - 1].all():
        raise CodecError("neighborhood span ends inside a varint")
    ends = np.flatnonzero(is_last)
    np.add(ends, 1, out=ends)
    starts = np.empty_like(ends)
    starts[0] = 0
    starts[1:] = ends[:-1]
    lengths = ends - starts
    width = int(lengths.max())
    if width > 10:
        raise CodecError("varint longer than 10 bytes")
    # terminator rank at each boundary gives cumulative row degrees
    row_counts = np.diff(np.searchsorted(ends, bounds, side="right"),
                         prepend=0)
    # byte 0 unconditionally, byte 1 masked, rarer tails per live subset
    acc = np.uint32 if width <= 4 else np.uint64
    values = (stream[starts] & np.uint8(0x7F)).astype(acc)
    if width > 1:
        padded = np.zeros(total + width - 1, dtype=np.uint8)
        padded[:total] = stream
        group = (padded[starts + 1] & np.uint8(0x7F)).astype(acc)
        values |= (group << acc(7)) * (lengths > 1)
        live = np.flatnonzero(lengths > 2)
        k = 2
        while len(live):
            group = (padded[starts[live] + k] & np.uint8(0x7F)).astype(acc)
            values[live] |= group << acc(7 * k)
            k += 1
            live = live[lengths[live] > k]
    if gaps:
        ids = _undo_gaps(values, row_counts, vs)
    else:
        ids = values.astype(np.int64)
    return row_counts, ids


def varint_counts_in_spans(buf: np.ndarray, byte_starts, byte_ends) -> np.ndarray:
    """Degrees of varint neighborhoods without decoding the values."""
    last = np.empty(len(buf) + 1, dtype=np.int32)
    last[0] = 0
    np.cumsum((buf & 0x80) == 0, dtype=np.int32, out=last[1:])
    starts = np.ascontiguousarray(byte_starts, dtype=np.int64)
    ends = np.ascontiguousarray(byte_ends, dtype=np.int64)
    return (last[ends] - last[starts]).astype(np.int64)


def decode_varint_row(buf: np.ndarray, byte_start: int, byte_end: int,
                      gaps: bool, v: int) -> np.ndarray:
    values, _ = varint_decode_stream(buf[byte_start:byte_end])
    if gaps:
        if len(values) == 0:
            return np.empty(0, dtype=np.int64)
        out = np.empty(len(values), dtype=np.int64)
        out[0] = v + zigzag_decode(int(values[0]))
        out[1:] = values[1:].astype(np.int64)
        return np.cumsum(out)
    return values.astype(np.int64)


def decode_brb_batch(buf: np.ndarray, start_bits, end_bits, k: int, sw: int,
                     part_start: np.ndarray,
                     counts_only: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Decode block-grouped neighborhoods for a batch of vertices.

    Walks one group per round across all still-active rows, so the number
    of vectorized passes is the largest group count of any row. Returns
    (row_counts, ids); ids is empty when counts_only.
    """
    start_bits = np.ascontiguousarray(start_bits, dtype=np.int64)
    end_bits = np.ascontiguousarray(end_bits, dtype=np.int64)
    nrows = len(start_bits)
    row_counts = np.zeros(nrows, dtype=np.int64)
    ids_parts: list[np.ndarray] = []
    rows_parts: list[np.ndarray] = []

    cur_pos = start_bits.copy()
    cur_end = end_bits.copy()
    cur_row = np.arange(nrows, dtype=np.int64)
    while len(cur_pos):
        alive = cur_pos + k + 8 <= cur_end
        cur_pos, cur_end, cur_row = cur_pos[alive], cur_end[alive], cur_row[alive]
        if not len(cur_pos):
            break
        prefix = read_bits_many(buf, cur_pos, k)
        cnt = np.zeros(len(cur_pos), dtype=np.uint64)
        cpos = cur_pos + k
        live = np.ones(len(cur_pos), dtype=bool)
        shift = 0
        while live.any():
            b = read_bits_many(buf, cpos[live], 8)
            cnt[live] |= (b & np.uint64(0x7F)) << np.uint64(shift)
            cpos[live] += 8
            idx = np.flatnonzero(live)
            live[idx[(b & np.uint64(0x80)) == 0]] = False
            shift += 7
            if shift > 63:
                raise CodecError("group count varint longer than 10 bytes")
        real = cnt > 0  # an all-zero header is block padding, row is done
        c = cnt[real].astype(np.int64)
        base = cpos[real]
        if (base + c * sw > cur_end[real]).any():
            raise CodecError("group runs past its neighborhood span")
        np.add.at(row_counts, cur_row[real], c)
        if not counts_only and len(c):
            spos = np.repeat(base, c) + _ragged_arange(c) * sw
            suf = read_bits_many(buf, spos, sw).astype(np.int64)
            pv = part_start[prefix[real].astype(np.int64)]
            ids_parts.append(np.repeat(pv, c) + suf)
            rows_parts.append(np.repeat(cur_row[real], c))
        cur_pos = base + c * sw
        cur_end = cur_end[real]
        cur_row = cur_row[real]

    if counts_only or not ids_parts:
        return row_counts, np.empty(0, dtype=np.int64)
    ids = np.concatenate(ids_parts)
    rows = np.concatenate(rows_parts)
    order = np.argsort(rows, kind="stable")
    return row_counts, ids[order]


def decode_brb_row(buf: np.ndarray, start_bit: int, end_bit: int, k: int,
                   sw: int, part_start: np.ndarray) -> np.ndarray:
    """Scalar group walk over one neighborhood."""
    out: list[np.ndarray] = []
    pos = start_bit
    while pos + k + 8 <= end_bit:
        prefix = read_bits(buf, pos, k)
        pos += k
        cnt = 0
        shift = 0
        while True:
            byte = read_bits(buf, pos, 8)
            pos += 8
            cnt |= (byte & 0x7F) << shift
            if not byte & 0x80:
                break
            shift += 7
            if shift > 63 or pos + 8 > end_bit:
                raise CodecError("bad group count varint")
        if cnt == 0:
            break
        if pos + cnt * sw > end_bit:
            raise CodecError("group runs past its neighborhood span")
        suf = unpack_ragged(buf, pos + sw * np.arange(cnt, dtype=np.int64),
                            np.full(cnt, sw, dtype=np.int64))
        out.append(int(part_start[prefix]) + suf.astype(np.int64))
        pos += cnt * sw
    if not out:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(out)


def header_widths(scheme: TransformScheme, ctx: FineContext) -> tuple[int, int]:
    """(id header field bits, weight header field bits) for local kinds."""
    if scheme.fixed:
        return header_field_bits(scheme.fine, ctx)
    return 0, 0
