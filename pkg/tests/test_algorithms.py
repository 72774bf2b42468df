"""Graph algorithms versus independent references, plain and compressed."""

import numpy as np
import pytest

from adjpack.algorithms import bfs, connected_components, pagerank, sssp, triangle_count
from adjpack.compressed import compress
from adjpack.errors import DomainError
from adjpack.graph import GraphSpec, from_edges, generate
from conftest import (
    canonical_labels,
    ref_bfs_dist,
    ref_components,
    ref_dijkstra,
    ref_pagerank,
    ref_triangles,
    two_clique_bridge,
)


def check_bfs_tree(g, source, parents, dist):
    """Structural validity: every non-root parent sits one level closer."""
    assert parents[source] == source and dist[source] == 0
    reached = np.flatnonzero(dist >= 0)
    for v in reached:
        v = int(v)
        if v == source:
            continue
        p = int(parents[v])
        assert dist[p] == dist[v] - 1
        assert p in g.neighbors_of(v).tolist()
    unreached = np.flatnonzero(dist < 0)
    assert np.array_equal(parents[unreached], np.full(len(unreached), -1))


@pytest.fixture(scope="module")
def corpus():
    graphs = [
        generate(GraphSpec(kind="er", n=150, p=0.03, seed=1)),
        generate(GraphSpec(kind="er", n=80, p=0.002, seed=2)),  # fragments
        generate(GraphSpec(kind="kronecker", scale=7, edge_factor=6, seed=3)),
        two_clique_bridge(),
        from_edges([0, 1, 2, 3], [1, 2, 3, 4], n=7),  # path + isolated tail
    ]
    return graphs


def test_bfs_distances_match_reference(corpus):
    for g in corpus:
        parents, dist = bfs(g, 0)
        assert np.array_equal(dist, ref_bfs_dist(g, 0))
        check_bfs_tree(g, 0, parents, dist)


def test_bfs_parent_is_min_frontier_neighbor():
    # diamond: two shortest paths into vertex 3; the smaller parent wins
    g = from_edges([0, 0, 1, 2], [1, 2, 3, 3])
    parents, dist = bfs(g, 0)
    assert dist.tolist() == [0, 1, 1, 2]
    assert parents[3] == 1


def test_bfs_direction_switch_consistency(kron_small):
    # forcing the bottom-up path must not change results
    p_ref, d_ref = bfs(kron_small, 1, alpha=10 ** 9, beta=1)  # stay top-down
    p_bu, d_bu = bfs(kron_small, 1, alpha=1, beta=10 ** 9)  # switch early
    assert np.array_equal(d_ref, d_bu)
    assert np.array_equal(p_ref, p_bu)


def test_bfs_source_checked(k4):
    with pytest.raises(DomainError):
        bfs(k4, 4)
    with pytest.raises(DomainError):
        sssp(k4, -1)


def test_bfs_isolated_source():
    g = from_edges([0], [1], n=3)
    parents, dist = bfs(g, 2)
    assert dist.tolist() == [-1, -1, 0]
    assert parents.tolist() == [-1, -1, 2]


def test_connected_components_match_reference(corpus):
    for g in corpus:
        got = connected_components(g)
        expect = ref_components(g)
        assert np.array_equal(canonical_labels(got), canonical_labels(expect))


def test_component_labels_are_minima(corpus):
    for g in corpus:
        labels = connected_components(g)
        assert np.array_equal(labels, canonical_labels(labels))


def test_pagerank_matches_dense_reference(corpus):
    for g in corpus:
        got = pagerank(g)
        expect = ref_pagerank(g)
        assert np.max(np.abs(got - expect)) < 1e-10
        assert got.sum() == pytest.approx(1.0, abs=1e-9)


def test_pagerank_star_shape():
    g = from_edges([0] * 5, [1, 2, 3, 4, 5])
    pr = pagerank(g)
    assert pr[0] > pr[1]
    assert np.allclose(pr[1:], pr[1])


def test_sssp_weighted_matches_dijkstra():
    for seed in range(3):
        g = generate(GraphSpec(kind="er", n=120, p=0.04, seed=seed,
                               weighted=True, max_weight=30))
        got = sssp(g, 0)
        assert np.array_equal(got, ref_dijkstra(g, 0))


def test_sssp_unweighted_equals_bfs(corpus):
    for g in corpus:
        _, dist = bfs(g, 0)
        assert np.array_equal(sssp(g, 0), dist)


def test_sssp_delta_invariance():
    g = generate(GraphSpec(kind="er", n=100, p=0.05, seed=9, weighted=True,
                           max_weight=50))
    base = sssp(g, 3)
    for delta in (1, 7, 100):
        assert np.array_equal(sssp(g, 3, delta=delta), base)
    with pytest.raises(DomainError):
        sssp(g, 3, delta=0)


def test_triangle_count_matches_cubic(corpus):
    for g in corpus:
        assert triangle_count(g) == ref_triangles(g)


def test_triangle_count_k4(k4):
    assert triangle_count(k4) == 4


def test_triangle_count_triangle_free():
    g = from_edges([0, 1, 2, 3], [1, 2, 3, 0])  # 4-cycle
    assert triangle_count(g) == 0


def test_algorithms_on_compressed_match_plain(corpus):
    """The same calls must work on compressed graphs verbatim."""
    for g in corpus[:3]:
        p0, d0 = bfs(g, 0)
        cc0 = connected_components(g)
        pr0 = pagerank(g)
        tc0 = triangle_count(g)
        for o_kind, a_kind in (("ptrlogn", "local-gap"), ("bvsd", "varint-gap"),
                               ("bvpl", "global-gap")):
            cg = compress(g, o_kind, a_kind)
            p1, d1 = bfs(cg, 0)
            assert np.array_equal(d1, d0), (o_kind, a_kind)
            assert np.array_equal(p1, p0), (o_kind, a_kind)
            assert np.array_equal(connected_components(cg), cc0)
            assert np.max(np.abs(pagerank(cg) - pr0)) < 1e-12
            assert triangle_count(cg) == tc0


def test_sssp_on_compressed_weighted():
    g = generate(GraphSpec(kind="er", n=90, p=0.05, seed=4, weighted=True,
                           max_weight=20))
    base = sssp(g, 0)
    for o_kind, a_kind in (("ptr64", "global"), ("ptrlogn", "local-gap"),
                           ("bvil", "global-gap")):
        cg = compress(g, o_kind, a_kind)
        assert np.array_equal(sssp(cg, 0), base)


def test_algorithms_under_permutation_map_back(er_small):
    """Results on a relabeled graph, mapped back, equal the originals."""
    g = er_small
    cg = compress(g, "ptrlogn", "global-gap", permuter="degmin")
    f = cg.permutation.forward
    _, d0 = bfs(g, 0)
    _, d1 = bfs(cg, int(f[0]))
    assert np.array_equal(d1[f], d0)
    cc1 = connected_components(cg)
    assert np.array_equal(canonical_labels(cc1[f]),
                          canonical_labels(connected_components(g)))
    pr1 = pagerank(cg)
    assert np.max(np.abs(pr1[f] - pagerank(g))) < 1e-10
    assert triangle_count(cg) == triangle_count(g)
