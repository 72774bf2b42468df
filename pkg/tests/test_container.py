"""Binary container serialization: byte-stable, lossless, validated."""

import numpy as np
import pytest

from adjpack.compressed import compress
from adjpack.container import (
    FLAG_COMPRESSED,
    FLAG_PERMUTED,
    FLAG_WEIGHTED,
    MAGIC,
    compressed_to_bytes,
    embedded_size_csv,
    from_bytes,
    graph_to_bytes,
    load,
    save,
)
from adjpack.errors import CodecError
from adjpack.graph import AdjacencyGraph, GraphSpec, from_edges, generate
from conftest import scheme_triples


def test_plain_graph_round_trip(er_small, tmp_path):
    blob = graph_to_bytes(er_small)
    assert blob[:4] == MAGIC
    back = from_bytes(blob)
    assert isinstance(back, AdjacencyGraph)
    assert np.array_equal(back.offsets, er_small.offsets)
    assert np.array_equal(back.neighbors, er_small.neighbors)
    assert back.weights is None
    path = tmp_path / "g.bin"
    save(str(path), er_small)
    again = load(str(path))
    assert np.array_equal(again.neighbors, er_small.neighbors)


def test_weighted_graph_round_trip(er_weighted):
    blob = graph_to_bytes(er_weighted)
    back = from_bytes(blob)
    assert np.array_equal(back.weights, er_weighted.weights)
    flags = int.from_bytes(blob[22:26], "little")
    assert flags & FLAG_WEIGHTED
    assert not flags & FLAG_COMPRESSED


def test_serialization_is_deterministic(er_small):
    assert graph_to_bytes(er_small) == graph_to_bytes(er_small)
    cg1 = compress(er_small, "bvsd", "varint-gap", permuter="degmin")
    cg2 = compress(er_small, "bvsd", "varint-gap", permuter="degmin")
    assert compressed_to_bytes(cg1) == compressed_to_bytes(cg2)


def test_compressed_round_trip_every_triple(er_small):
    for o_kind, a_kind, permuter in scheme_triples():
        cg = compress(er_small, o_kind, a_kind, permuter=permuter, seed=2)
        back = from_bytes(compressed_to_bytes(cg))
        assert back.o_kind == o_kind and back.scheme.kind == a_kind
        assert np.array_equal(back.degrees(), cg.degrees())
        i1, d1, _ = back.adjacency_all()
        i0, d0, _ = cg.adjacency_all()
        assert np.array_equal(i1, i0) and np.array_equal(d1, d0), \
            (o_kind, a_kind, permuter)
        # reserialization is byte-identical
        assert compressed_to_bytes(back) == compressed_to_bytes(cg)
        if permuter == "identity":
            assert back.permutation is None
        else:
            assert np.array_equal(back.permutation.forward,
                                  cg.permutation.forward)


def test_compressed_weighted_round_trip(er_weighted):
    for wm in ("global_width", "local_width"):
        cg = compress(er_weighted, "ptrlogn", "local", weight_mode=wm)
        back = from_bytes(compressed_to_bytes(cg))
        g = back.decode()
        assert np.array_equal(g.weights, er_weighted.weights)
        assert back.max_weight == er_weighted.max_weight


def test_permuted_flag_and_relabel(er_small):
    cg = compress(er_small, "ptr64", "global", permuter="rb", seed=1)
    blob = compressed_to_bytes(cg)
    flags = int.from_bytes(blob[22:26], "little")
    assert flags & FLAG_PERMUTED and flags & FLAG_COMPRESSED
    back = from_bytes(blob)
    restored = back.decode(relabel_back=True)
    assert np.array_equal(restored.neighbors, er_small.neighbors)


def test_brb_container_keeps_blocks(kron_small):
    cg = compress(kron_small, "ptrlogn", "brb", permuter="brb", seed=3)
    back = from_bytes(compressed_to_bytes(cg))
    assert back.brb_depth == cg.brb_depth
    assert back.suffix_width == cg.suffix_width
    assert np.array_equal(back.part_start, cg.part_start)
    assert np.array_equal(back.decode().neighbors, cg.decode().neighbors)


def test_bad_magic_rejected(er_small):
    blob = bytearray(graph_to_bytes(er_small))
    blob[:4] = b"WHAT"
    with pytest.raises(CodecError):
        from_bytes(bytes(blob))


def test_truncation_rejected(er_small):
    blob = graph_to_bytes(er_small)
    for cut in (3, 17, len(blob) // 2, len(blob) - 1):
        with pytest.raises(CodecError):
            from_bytes(blob[:cut])


def test_bad_version_rejected(er_small):
    blob = bytearray(graph_to_bytes(er_small))
    blob[4] = 99
    with pytest.raises(CodecError):
        from_bytes(bytes(blob))


def test_embedded_size_csv(tmp_path, er_small):
    cg = compress(er_small, "bvpl", "global-gap")
    rep = cg.size_report()
    csv = "part,bits\npayload,%d\n" % rep["payload_bits"]
    path = tmp_path / "c.bin"
    save(str(path), cg, size_csv=csv)
    assert embedded_size_csv(str(path)) == csv
    # absent by default
    path2 = tmp_path / "c2.bin"
    save(str(path2), cg)
    assert embedded_size_csv(str(path2)) == ""
    # and the graph still loads with the csv section present
    back = load(str(path))
    assert np.array_equal(back.degrees(), cg.degrees())


def test_empty_and_tiny_graphs():
    empty = from_edges([], [], n=0)
    assert from_bytes(graph_to_bytes(empty)).n == 0
    one = from_edges([], [], n=1)
    back = from_bytes(graph_to_bytes(one))
    assert back.n == 1 and back.m == 0
    cg = compress(one, "ptr64", "global")
    assert from_bytes(compressed_to_bytes(cg)).decode().n == 1
