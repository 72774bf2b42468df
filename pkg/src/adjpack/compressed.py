"""Compressed adjacency-array graphs.

A compressed graph is three parts glued together: an optional vertex
relabeling, an adjacency payload (fixed-width, varint, or block-grouped
fields), and an offset structure (pointer array or rank/select bit vector)
that says where each neighborhood lives. The combination answers the same
query surface as AdjacencyGraph, so the graph algorithms run on either
representation unchanged.

Not every pairing works. Pointer offsets can bound any payload, but varint
payloads have no way to report where a neighborhood ends except by byte
blocks, so they need a bit-vector offset. Bit-vector offsets only know block
boundaries, so they cannot recover degrees when each neighborhood picks its
own field width; the local kinds need pointer offsets. check_config spells
this out before any work happens.
"""

from __future__ import annotations

import numpy as np

from .bitio import (PackedArray, pack_ragged, unpack_ragged,
                    zigzag_decode_array)
from .errors import ConfigError, DomainError
from .finelog import FineContext
from .graph import AdjacencyGraph
from .offsets import (BITVECTOR_KINDS, POINTER_KINDS, OffsetArray,
                      OffsetBitVector, RankBits, build_bitvector,
                      build_offset_array)
from .permute import PERMUTER_KINDS, Permutation, apply, make_permutation
from .transform import (ADJACENCY_KINDS, FIXED_KINDS, VARINT_KINDS,
                        TransformScheme, decode_brb_batch, decode_brb_row,
                        decode_fixed_batch, decode_varint_batch,
                        decode_varint_row, encode_adjacency, header_widths,
                        read_fixed_entry, varint_counts_in_spans)

OFFSET_KINDS = POINTER_KINDS + BITVECTOR_KINDS


def check_config(o_kind: str, a_kind: str, weight_mode: str = "none"):
    """Reject offset/adjacency pairings that cannot answer queries."""
    if o_kind not in OFFSET_KINDS:
        raise ConfigError(f"unknown offset kind {o_kind!r}; "
                          f"valid kinds are {', '.join(OFFSET_KINDS)}")
    if a_kind not in ADJACENCY_KINDS:
        raise ConfigError(f"unknown adjacency kind {a_kind!r}; "
                          f"valid kinds are {', '.join(ADJACENCY_KINDS)}")
    if o_kind in POINTER_KINDS and a_kind in VARINT_KINDS:
        raise ConfigError(
            f"{a_kind} adjacency only marks neighborhood ends at byte "
            f"blocks; pair it with one of {', '.join(BITVECTOR_KINDS)}")
    if o_kind in BITVECTOR_KINDS:
        if a_kind in ("local", "local-gap"):
            raise ConfigError(
                f"{o_kind} offsets cannot recover degrees when every "
                f"neighborhood picks its own width; {a_kind} needs one of "
                f"{', '.join(POINTER_KINDS)}")
        if a_kind in FIXED_KINDS and weight_mode == "local_width":
            raise ConfigError(
                f"{o_kind} offsets need a uniform entry stride; per-"
                f"neighborhood weight widths require a pointer offset")


def valid_pairs(weighted: bool = False) -> list[tuple[str, str]]:
    """All (offset kind, adjacency kind) pairings that can be built."""
    out = []
    for o in OFFSET_KINDS:
        for a in ADJACENCY_KINDS:
            if weighted and a not in FIXED_KINDS:
                continue
            try:
                check_config(o, a)
            except ConfigError:
                continue
            out.append((o, a))
    return out


def _resolve_block_bits(block_bits, scheme: TransformScheme, stride):
    if not scheme.fixed:
        if block_bits not in (None, "entry", 8):
            raise ConfigError(
                f"{scheme.kind} payloads are byte streams; block_bits must be 8")
        return 8
    if block_bits in (None, "entry"):
        return stride
    if block_bits not in (8, 64):
        raise ConfigError("block_bits must be 8, 64, or 'entry'")
    if block_bits > stride:
        raise ConfigError(
            f"block padding would swallow whole entries: block size "
            f"{block_bits} exceeds the {stride}-bit entry")
    return block_bits


class CompressedGraph:
    """Query structure over a packed adjacency payload.

    Vertices are the labels AFTER the stored permutation; `permutation`
    maps original IDs to these labels (identity when None).
    """

    def __init__(self, *, n, m, weighted, max_weight, o_kind, scheme,
                 block_bits, payload, payload_bits, offsets, nonempty,
                 id_hdr, wt_hdr, id_width_global, wt_width_global, stride,
                 part_start=None, brb_depth=0, suffix_width=0,
                 permutation=None, global_gap_max=0):
        self.n = n
        self.m = m
        self.weighted = weighted
        self.max_weight = max_weight
        self.o_kind = o_kind
        self.scheme = scheme
        self.block_bits = block_bits
        self.payload = payload  # bytes, includes the 8-byte slack tail
        self.payload_bits = payload_bits
        self.offsets = offsets
        self.nonempty = nonempty
        self.id_hdr = id_hdr
        self.wt_hdr = wt_hdr
        self.id_width_global = id_width_global
        self.wt_width_global = wt_width_global
        self.stride = stride
        self.part_start = part_start
        self.brb_depth = brb_depth
        self.suffix_width = suffix_width
        self.permutation = permutation
        self.global_gap_max = global_gap_max
        self._buf = np.frombuffer(payload, dtype=np.uint8)

    # --- scalar queries ---

    def _check_vertex(self, v: int):
        if not 0 <= v < self.n:
            raise DomainError(f"vertex {v} out of range [0, {self.n})")

    def _widths_of(self, v: int) -> tuple[int, int]:
        idw = (self.id_hdr.get(v) + 1) if self.id_hdr is not None \
            else self.id_width_global
        if not self.scheme.weighted:
            return idw, 0
        wtw = (self.wt_hdr.get(v) + 1) if self.wt_hdr is not None \
            else self.wt_width_global
        return idw, wtw

    def _span_bits(self, v: int) -> tuple[int, int]:
        if isinstance(self.offsets, OffsetArray):
            s, e = self.offsets.span(v)
            if self.offsets.unit == "neighbor":
                return s * self.stride, e * self.stride
            return s, e
        if not self.nonempty.get(v):
            return 0, 0
        j = self.nonempty.rank_excl(v) + 1
        return self.offsets.span_bits(j)

    def offset_of(self, v: int) -> int:
        """Bit position where v's neighborhood starts in the payload."""
        self._check_vertex(v)
        return self._span_bits(v)[0]

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        if isinstance(self.offsets, OffsetArray) \
                and self.offsets.unit == "neighbor":
            s, e = self.offsets.span(v)
            return e - s
        s, e = self._span_bits(v)
        if e == s:
            return 0
        if self.scheme.fixed:
            idw, wtw = self._widths_of(v)
            return (e - s) // (idw + wtw)
        if self.scheme.kind == "brb":
            cnt, _ = decode_brb_batch(self._buf, [s], [e], self.brb_depth,
                                      self.suffix_width, self.part_start,
                                      counts_only=True)
            return int(cnt[0])
        return int(varint_counts_in_spans(self._buf, [s >> 3], [e >> 3])[0])

    def _row(self, v: int):
        self._check_vertex(v)
        s, e = self._span_bits(v)
        if self.scheme.fixed:
            idw, wtw = self._widths_of(v)
            d = (e - s) // (idw + wtw) if e > s else 0
            ids, w = decode_fixed_batch(
                self._buf, np.array([s]), np.array([d]), np.array([idw]),
                np.array([wtw]), self.scheme.gaps, np.array([v]))
            return ids, w
        if self.scheme.kind == "brb":
            return decode_brb_row(self._buf, s, e, self.brb_depth,
                                  self.suffix_width, self.part_start), None
        return decode_varint_row(self._buf, s >> 3, e >> 3,
                                 self.scheme.gaps, v), None

    def neighbors_of(self, v: int) -> np.ndarray:
        return self._row(v)[0]

    def weights_of(self, v: int) -> np.ndarray:
        if not self.weighted:
            raise DomainError("graph is unweighted")
        return self._row(v)[1]

    def neighbor(self, v: int, i: int) -> int:
        """The i-th (0-based) neighbor of v in sorted order."""
        self._check_vertex(v)
        s, e = self._span_bits(v)
        if self.scheme.fixed:
            idw, wtw = self._widths_of(v)
            d = (e - s) // (idw + wtw) if e > s else 0
            if not 0 <= i < d:
                raise DomainError(f"neighbor index {i} out of range [0, {d})")
            if not self.scheme.gaps:
                return read_fixed_entry(self._buf, s, i, idw, wtw)
            ids, _ = decode_fixed_batch(
                self._buf, np.array([s]), np.array([i + 1]), np.array([idw]),
                np.array([wtw]), True, np.array([v]))
            return int(ids[i])
        ids = self._row(v)[0]
        if not 0 <= i < len(ids):
            raise DomainError(f"neighbor index {i} out of range [0, {len(ids)})")
        return int(ids[i])

    # --- bulk queries ---

    def degrees(self) -> np.ndarray:
        # algorithms ask for this repeatedly; the varint/brb paths walk the
        # whole payload to count entries, so keep the result around
        cached = getattr(self, "_deg_cache", None)
        if cached is not None:
            return cached
        starts, ends = self._all_spans_bits()
        if isinstance(self.offsets, OffsetArray) \
                and self.offsets.unit == "neighbor":
            deg = (ends - starts) // self.stride
        elif self.scheme.fixed:
            idw, wtw = self._all_widths()
            deg = (ends - starts) // (idw + wtw)
        elif self.scheme.kind == "brb":
            deg, _ = decode_brb_batch(self._buf, starts, ends, self.brb_depth,
                                      self.suffix_width, self.part_start,
                                      counts_only=True)
        else:
            deg = varint_counts_in_spans(self._buf, starts >> 3, ends >> 3)
        self._deg_cache = deg
        return deg

    def _all_widths(self) -> tuple[np.ndarray, np.ndarray]:
        if self.id_hdr is not None:
            idw = self.id_hdr.unpack().astype(np.int64) + 1
        else:
            idw = np.full(self.n, self.id_width_global, dtype=np.int64)
        if not self.scheme.weighted:
            return idw, np.zeros(self.n, dtype=np.int64)
        if self.wt_hdr is not None:
            wtw = self.wt_hdr.unpack().astype(np.int64) + 1
        else:
            wtw = np.full(self.n, self.wt_width_global, dtype=np.int64)
        return idw, wtw

    def _all_spans_bits(self) -> tuple[np.ndarray, np.ndarray]:
        """(start_bit, end_bit) for every vertex; empty rows get (0, 0)."""
        if isinstance(self.offsets, OffsetArray):
            bounds = self.offsets.boundaries()
            if self.offsets.unit == "neighbor":
                bounds = bounds * self.stride
            return bounds[:-1], bounds[1:]
        starts = np.zeros(self.n, dtype=np.int64)
        ends = np.zeros(self.n, dtype=np.int64)
        fl = self.nonempty.flags()
        pos = self.offsets.bv.positions() * self.block_bits
        starts[fl] = pos[:-1]
        ends[fl] = pos[1:]
        return starts, ends

    def _batch_spans_bits(self, vs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if isinstance(self.offsets, OffsetArray):
            s = self.offsets.entries.gather(vs).astype(np.int64)
            e = self.offsets.entries.gather(vs + 1).astype(np.int64)
            if self.offsets.unit == "neighbor":
                return s * self.stride, e * self.stride
            return s, e
        starts = np.zeros(len(vs), dtype=np.int64)
        ends = np.zeros(len(vs), dtype=np.int64)
        fl = self.nonempty.get_many(vs).astype(bool)
        if fl.any():
            ords = self.nonempty.rank_excl_many(vs[fl]) + 1
            starts[fl] = self.offsets.starts_many(ords)
            ends[fl] = self.offsets.starts_many(ords + 1)
        return starts, ends

    def adjacency_batch(self, vs):
        """Neighborhoods of the given vertices, concatenated.

        Same contract as AdjacencyGraph.adjacency_batch: returns
        (indptr, ids, weights), weights None when unweighted.
        """
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        if len(vs) and (int(vs.min()) < 0 or int(vs.max()) >= self.n):
            raise DomainError("vertex out of range in adjacency_batch")
        starts, ends = self._batch_spans_bits(vs)
        return self._decode_spans(vs, starts, ends)

    def adjacency_all(self):
        """Whole graph as (offsets, neighbors, weights) arrays."""
        vs = np.arange(self.n, dtype=np.int64)
        starts, ends = self._all_spans_bits()
        return self._decode_spans(vs, starts, ends)

    def first_neighbors(self, vs) -> np.ndarray:
        """Smallest neighbor of each given vertex without a full row decode.

        Rows are sorted, so only the leading entry is read: one fixed-width
        field or one varint per vertex. Every vertex passed in must have
        degree > 0.
        """
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        if len(vs) == 0:
            return np.empty(0, dtype=np.int64)
        starts, ends = self._batch_spans_bits(vs)
        if self.scheme.kind == "brb":
            indptr, ids, _ = self._decode_spans(vs, starts, ends)
            return ids[indptr[:-1]]
        if self.scheme.fixed:
            if self.id_hdr is not None or self.wt_hdr is not None:
                idw_all, _ = self._all_widths()
                idw = idw_all[vs]
            else:
                idw = np.full(len(vs), self.id_width_global, dtype=np.int64)
            raw = unpack_ragged(self._buf, starts, idw)
        else:
            bs = starts >> 3
            b = self._buf
            c = b[bs].astype(np.uint64)
            raw = c & np.uint64(0x7F)
            live = np.flatnonzero(c & np.uint64(0x80))
            k = 1
            while len(live):
                c = b[bs[live] + k].astype(np.uint64)
                raw[live] |= (c & np.uint64(0x7F)) << np.uint64(7 * k)
                live = live[(c & np.uint64(0x80)) != 0]
                k += 1
        if self.scheme.gaps:
            return vs + zigzag_decode_array(raw)
        return raw.astype(np.int64)

    def _decode_spans(self, vs, starts, ends):
        if self.scheme.fixed:
            if self.id_hdr is not None or self.wt_hdr is not None:
                idw_all, wtw_all = self._all_widths()
                idw, wtw = idw_all[vs], wtw_all[vs]
            else:
                idw = np.full(len(vs), self.id_width_global, dtype=np.int64)
                wtw = np.full(len(vs), self.wt_width_global if
                              self.scheme.weighted else 0, dtype=np.int64)
            deg = (ends - starts) // (idw + wtw)
            ids, w = decode_fixed_batch(self._buf, starts, deg, idw, wtw,
                                        self.scheme.gaps, vs)
        elif self.scheme.kind == "brb":
            deg, ids = decode_brb_batch(self._buf, starts, ends,
                                        self.brb_depth, self.suffix_width,
                                        self.part_start)
            w = None
        else:
            deg, ids = decode_varint_batch(self._buf, starts >> 3, ends >> 3,
                                           self.scheme.gaps, vs)
            w = None
        indptr = np.zeros(len(vs) + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        return indptr, ids, w

    def decode(self, relabel_back: bool = False) -> AdjacencyGraph:
        """Expand back to a plain adjacency array.

        With relabel_back the stored permutation is undone, returning the
        graph under its original vertex IDs.
        """
        indptr, ids, w = self.adjacency_all()
        g = AdjacencyGraph(indptr, ids, w)
        if relabel_back and self.permutation is not None:
            g = apply(g, Permutation(self.permutation.inverse(), "inverse"))
        return g

    # --- accounting ---

    def size_report(self) -> dict:
        off = self.offsets.size_report()
        offset_bits = off["raw_bits"] + off["aux_bits"]
        header_bits = 0
        if self.id_hdr is not None:
            header_bits += self.id_hdr.bit_length
        if self.wt_hdr is not None:
            header_bits += self.wt_hdr.bit_length
        side_bits = 0
        if self.nonempty is not None:
            sr = self.nonempty.size_report()
            side_bits = sr["raw_bits"] + sr["aux_bits"]
        aux_bits = 0
        if self.part_start is not None:
            aux_bits += len(self.part_start) * max(1, int(self.n).bit_length())
        total = self.payload_bits + offset_bits + header_bits + side_bits \
            + aux_bits
        label = f"{self.o_kind}+{self.scheme.kind}"
        if self.scheme.weighted:
            label += f"+w({self.scheme.weight_mode})"
        return {
            "config": label,
            "n": self.n,
            "m": self.m,
            "payload_bits": self.payload_bits,
            "offset_bits": offset_bits,
            "offsets": off,
            "header_bits": header_bits,
            "side_bits": side_bits,
            "aux_bits": aux_bits,
            "total_bits": total,
            "bits_per_edge": (total / (2 * self.m)) if self.m else float("inf"),
        }


def compress(g: AdjacencyGraph, o_kind: str = "ptrlogn",
             a_kind: str = "global", permuter: str = "identity",
             weight_mode: str | None = None, block_bits=None, seed: int = 0,
             imbalance: float = 0.0, brb_depth: int = 4,
             precomputed_order=None) -> CompressedGraph:
    """Build a compressed graph from a plain adjacency array.

    `precomputed_order` reuses a (Permutation, BrbLabeling | None) pair from
    an earlier make_permutation call with matching parameters, so callers
    that time the reordering step separately do not pay for it twice.
    """
    if permuter not in PERMUTER_KINDS:
        raise ConfigError(f"unknown permuter {permuter!r}; "
                          f"valid kinds are {', '.join(PERMUTER_KINDS)}")
    if weight_mode is None:
        weight_mode = "global_width" if g.weighted else "none"
    if g.weighted and weight_mode == "none":
        raise ConfigError("graph has weights; pick a weight mode "
                          "(global_width or local_width)")
    check_config(o_kind, a_kind, weight_mode)
    scheme = TransformScheme(a_kind, weight_mode)
    scheme.validate()
    if a_kind == "brb" and permuter != "brb":
        raise ConfigError("brb adjacency derives its blocks from the brb "
                          "vertex order; use permuter='brb'")

    if precomputed_order is not None:
        perm, brb_lab = precomputed_order
    else:
        perm, brb_lab = make_permutation(g, permuter, seed=seed,
                                         imbalance=imbalance,
                                         brb_depth=brb_depth)
    g2 = apply(g, perm) if permuter != "identity" else g
    enc = encode_adjacency(g2, scheme, brb=brb_lab)
    ctx = enc.ctx

    idh_bits, wth_bits = header_widths(scheme, ctx)
    id_hdr = PackedArray.pack(enc.id_widths - 1, idh_bits) if idh_bits else None
    wt_hdr = PackedArray.pack(enc.wt_widths - 1, wth_bits) if wth_bits else None

    id_width_global = 0
    if scheme.fixed and not scheme.local_ids:
        id_width_global = ctx.global_gap_width if scheme.gaps \
            else ctx.global_id_width
    wt_width_global = ctx.global_weight_width \
        if scheme.weight_mode == "global_width" else 0
    uniform = scheme.fixed and not scheme.local_ids \
        and scheme.weight_mode != "local_width"
    stride = id_width_global + wt_width_global if uniform else None

    deg2 = g2.degrees()
    if o_kind in POINTER_KINDS:
        payload, payload_bits = enc.pack()
        if uniform:
            bounds = np.zeros(g.n + 1, dtype=np.int64)
            np.cumsum(deg2, out=bounds[1:])
            offsets = build_offset_array(o_kind, bounds, unit="neighbor")
        else:
            bounds = np.zeros(g.n + 1, dtype=np.int64)
            np.cumsum(enc.bit_lengths, out=bounds[1:])
            offsets = build_offset_array(o_kind, bounds, unit="bit")
        nonempty = None
        bb = None
    else:
        bb = _resolve_block_bits(block_bits, scheme, stride)
        pad = (-enc.bit_lengths) % bb
        values, widths = enc.values, enc.widths
        rows_pad = np.flatnonzero(pad > 0)
        if len(rows_pad):
            at = np.cumsum(enc.value_counts)[rows_pad]
            values = np.insert(values, at, np.uint64(0))
            widths = np.insert(widths, at, pad[rows_pad])
        payload, payload_bits = pack_ragged(values, widths)
        padded_len = enc.bit_lengths + pad
        starts_all = np.cumsum(padded_len) - padded_len
        nzmask = deg2 > 0
        offsets = build_bitvector(starts_all[nzmask], payload_bits, bb,
                                  o_kind, g.n)
        nonempty = RankBits.from_flags(nzmask)

    return CompressedGraph(
        n=g.n, m=g.m, weighted=scheme.weighted,
        max_weight=g.max_weight if scheme.weighted else 0,
        o_kind=o_kind, scheme=scheme, block_bits=bb,
        payload=payload, payload_bits=payload_bits,
        offsets=offsets, nonempty=nonempty,
        id_hdr=id_hdr, wt_hdr=wt_hdr,
        id_width_global=id_width_global, wt_width_global=wt_width_global,
        stride=stride,
        part_start=brb_lab.part_start if a_kind == "brb" else None,
        brb_depth=brb_lab.depth if a_kind == "brb" else 0,
        suffix_width=brb_lab.suffix_width if a_kind == "brb" else 0,
        permutation=None if permuter == "identity" else perm,
        global_gap_max=ctx.global_gap_max)
