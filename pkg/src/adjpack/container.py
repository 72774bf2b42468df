"""Binary container for plain and compressed graphs.

Layout: magic "ADJP", a u16 format version, a fixed little-endian header
(n, m, flags, offset-kind index, adjacency-kind index, block bits, max
weight), then a sequence of (4-byte tag, u64 length, payload) sections.
Everything is written in one deterministic order, so identical inputs
produce identical bytes.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .bitio import PackedArray
from .compressed import CompressedGraph
from .errors import CodecError
from .graph import AdjacencyGraph
from .offsets import (BITVECTOR_KINDS, POINTER_KINDS, OffsetArray,
                      bitvector_from_parts, bitvector_to_parts,
                      rankbits_from_parts, rankbits_to_parts)
from .permute import Permutation
from .transform import ADJACENCY_KINDS, TransformScheme

MAGIC = b"ADJP"
VERSION = 1

_HEADER = struct.Struct("<4sHQQIBBHI")
_SECTION = struct.Struct("<4sQ")

FLAG_WEIGHTED = 1
FLAG_PERMUTED = 2
FLAG_COMPRESSED = 4

_O_KINDS = POINTER_KINDS + BITVECTOR_KINDS
_NONE = 255


def _pack_sections(sections: list[tuple[bytes, bytes]]) -> bytes:
    out = bytearray()
    for tag, payload in sections:
        out += _SECTION.pack(tag, len(payload))
        out += payload
    return bytes(out)


def _unpack_sections(buf: bytes) -> dict[bytes, bytes]:
    out = {}
    pos = 0
    while pos < len(buf):
        if pos + _SECTION.size > len(buf):
            raise CodecError("truncated section header")
        tag, length = _SECTION.unpack_from(buf, pos)
        pos += _SECTION.size
        if pos + length > len(buf):
            raise CodecError(f"section {tag!r} runs past end of file")
        out[tag] = buf[pos : pos + length]
        pos += length
    return out


def _meta_bytes(meta: dict) -> bytes:
    return json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()


def graph_to_bytes(g: AdjacencyGraph) -> bytes:
    flags = FLAG_WEIGHTED if g.weighted else 0
    header = _HEADER.pack(MAGIC, VERSION, g.n, g.m, flags, _NONE, _NONE, 0,
                          g.max_weight)
    sections = [
        (b"OFFS", g.offsets.astype("<i8").tobytes()),
        (b"NBRS", g.neighbors.astype("<i8").tobytes()),
    ]
    if g.weighted:
        sections.append((b"WGTS", g.weights.astype("<i8").tobytes()))
    return header + _pack_sections(sections)


def compressed_to_bytes(cg: CompressedGraph, size_csv: str = "") -> bytes:
    flags = FLAG_COMPRESSED
    if cg.weighted:
        flags |= FLAG_WEIGHTED
    if cg.permutation is not None:
        flags |= FLAG_PERMUTED
    header = _HEADER.pack(MAGIC, VERSION, cg.n, cg.m, flags,
                          _O_KINDS.index(cg.o_kind),
                          ADJACENCY_KINDS.index(cg.scheme.kind),
                          cg.block_bits or 0, cg.max_weight)
    meta = {
        "weight_mode": cg.scheme.weight_mode,
        "payload_bits": cg.payload_bits,
        "id_width_global": cg.id_width_global,
        "wt_width_global": cg.wt_width_global,
        "stride": cg.stride,
        "global_gap_max": cg.global_gap_max,
        "brb_depth": cg.brb_depth,
        "suffix_width": cg.suffix_width,
        "permuter": cg.permutation.scheme if cg.permutation is not None else "identity",
    }
    sections: list[tuple[bytes, bytes]] = []
    if isinstance(cg.offsets, OffsetArray):
        meta["offset_unit"] = cg.offsets.unit
        meta["offset_width"] = cg.offsets.entries.width
        sections.append((b"OFFP", cg.offsets.entries.payload_bytes()))
    else:
        parts = bitvector_to_parts(cg.offsets)
        meta["bv"] = {k: v for k, v in parts.items()
                      if not isinstance(v, bytes)}
        for tag, key in ((b"OBVW", "words"), (b"OBVL", "low"),
                         (b"OBVU", "upper")):
            if key in parts:
                sections.append((tag, parts[key]))
        sections.append((b"NEMP", rankbits_to_parts(cg.nonempty)["words"]))
    if cg.id_hdr is not None:
        meta["id_hdr_width"] = cg.id_hdr.width
        sections.append((b"IDHW", cg.id_hdr.payload_bytes()))
    if cg.wt_hdr is not None:
        meta["wt_hdr_width"] = cg.wt_hdr.width
        sections.append((b"WTHW", cg.wt_hdr.payload_bytes()))
    if cg.part_start is not None:
        sections.append((b"PART", cg.part_start.astype("<i8").tobytes()))
    if cg.permutation is not None:
        sections.append((b"PERM", cg.permutation.forward.astype("<i8").tobytes()))
    payload_nbytes = (cg.payload_bits + 7) >> 3
    sections.insert(0, (b"META", _meta_bytes(meta)))
    sections.append((b"PAYL", cg.payload[:payload_nbytes]))
    if size_csv:
        sections.append((b"SIZE", size_csv.encode()))
    return header + _pack_sections(sections)


def from_bytes(buf: bytes):
    """Parse a container; returns AdjacencyGraph or CompressedGraph."""
    if len(buf) < _HEADER.size:
        raise CodecError("file shorter than the container header")
    magic, version, n, m, flags, o_idx, a_idx, block_bits, max_weight = \
        _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise CodecError("not a graph container (bad magic)")
    if version != VERSION:
        raise CodecError(f"unsupported container version {version}")
    sections = _unpack_sections(buf[_HEADER.size :])
    if not flags & FLAG_COMPRESSED:
        offsets = np.frombuffer(sections[b"OFFS"], dtype="<i8")
        neighbors = np.frombuffer(sections[b"NBRS"], dtype="<i8")
        weights = None
        if flags & FLAG_WEIGHTED:
            weights = np.frombuffer(sections[b"WGTS"], dtype="<i8")
        return AdjacencyGraph(offsets, neighbors, weights)

    meta = json.loads(sections[b"META"].decode())
    o_kind = _O_KINDS[o_idx]
    a_kind = ADJACENCY_KINDS[a_idx]
    scheme = TransformScheme(a_kind, meta["weight_mode"])
    payload_bits = meta["payload_bits"]
    payload = sections[b"PAYL"] + b"\x00" * 8

    if o_kind in POINTER_KINDS:
        entries = PackedArray.from_payload(sections[b"OFFP"],
                                           meta["offset_width"], n + 1)
        offsets = OffsetArray(o_kind, entries, meta["offset_unit"])
        nonempty = None
    else:
        parts = dict(meta["bv"])
        parts["flavor"] = o_kind
        for tag, key in ((b"OBVW", "words"), (b"OBVL", "low"),
                         (b"OBVU", "upper")):
            if tag in sections:
                parts[key] = sections[tag]
        if o_kind == "bvsd" and "low" not in parts:
            parts["low"] = b""
        offsets = bitvector_from_parts(parts)
        nonempty = rankbits_from_parts({"n": n, "words": sections[b"NEMP"]})

    id_hdr = None
    if b"IDHW" in sections:
        id_hdr = PackedArray.from_payload(sections[b"IDHW"],
                                          meta["id_hdr_width"], n)
    wt_hdr = None
    if b"WTHW" in sections:
        wt_hdr = PackedArray.from_payload(sections[b"WTHW"],
                                          meta["wt_hdr_width"], n)
    part_start = None
    if b"PART" in sections:
        part_start = np.frombuffer(sections[b"PART"], dtype="<i8")
    permutation = None
    if flags & FLAG_PERMUTED:
        forward = np.frombuffer(sections[b"PERM"], dtype="<i8")
        permutation = Permutation(forward, meta["permuter"])

    return CompressedGraph(
        n=n, m=m, weighted=bool(flags & FLAG_WEIGHTED),
        max_weight=max_weight, o_kind=o_kind, scheme=scheme,
        block_bits=block_bits or None, payload=payload,
        payload_bits=payload_bits, offsets=offsets, nonempty=nonempty,
        id_hdr=id_hdr, wt_hdr=wt_hdr,
        id_width_global=meta["id_width_global"],
        wt_width_global=meta["wt_width_global"], stride=meta["stride"],
        part_start=part_start, brb_depth=meta["brb_depth"],
        suffix_width=meta["suffix_width"], permutation=permutation,
        global_gap_max=meta["global_gap_max"])


def save(path: str, obj, size_csv: str = ""):
    if isinstance(obj, CompressedGraph):
        data = compressed_to_bytes(obj, size_csv)
    else:
        data = graph_to_bytes(obj)
    with open(path, "wb") as fh:
        fh.write(data)


def load(path: str):
    with open(path, "rb") as fh:
        return from_bytes(fh.read())


def embedded_size_csv(path: str) -> str:
    with open(path, "rb") as fh:
        buf = fh.read()
    sections = _unpack_sections(buf[_HEADER.size :])
    return sections.get(b"SIZE", b"").decode()
