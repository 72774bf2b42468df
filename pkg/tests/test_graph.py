"""Graph construction, edge-list parsing, and seeded generators."""

import numpy as np
import pytest

from adjpack.errors import DomainError, ParseError
from adjpack.graph import AdjacencyGraph, GraphSpec, from_edges, generate, load_edge_list


def test_from_edges_k4(k4):
    assert k4.n == 4
    assert k4.m == 6
    assert not k4.weighted
    for v in range(4):
        assert k4.degree(v) == 3
        expect = sorted(set(range(4)) - {v})
        assert k4.neighbors_of(v).tolist() == expect
    k4.validate()


def test_from_edges_drops_self_loops_and_duplicates():
    g = from_edges([0, 0, 1, 1, 2], [0, 1, 0, 2, 2])
    assert g.m == 2
    assert g.neighbors_of(0).tolist() == [1]
    assert g.neighbors_of(1).tolist() == [0, 2]
    g.validate()


def test_from_edges_duplicate_keeps_min_weight():
    g = from_edges([0, 1, 0], [1, 0, 1], w=[9, 4, 7])
    assert g.m == 1
    assert g.weights_of(0).tolist() == [4]
    assert g.weights_of(1).tolist() == [4]
    assert g.max_weight == 4


def test_from_edges_explicit_n_and_isolated_vertices():
    g = from_edges([0], [1], n=5)
    assert g.n == 5
    assert g.degrees().tolist() == [1, 1, 0, 0, 0]
    with pytest.raises(DomainError):
        from_edges([0, 6], [1, 2], n=5)


def test_from_edges_rejects_bad_input():
    with pytest.raises(DomainError):
        from_edges([0, 1], [1])
    with pytest.raises(DomainError):
        from_edges([-1], [0])
    with pytest.raises(DomainError):
        from_edges([0], [1], w=[-3])


def test_adjacency_batch_and_all(er_small):
    vs = np.array([5, 0, 17, 5, 119])
    indptr, ids, wts = er_small.adjacency_batch(vs)
    assert wts is None
    assert indptr[0] == 0
    for i, v in enumerate(vs):
        row = ids[indptr[i]:indptr[i + 1]]
        assert row.tolist() == er_small.neighbors_of(int(v)).tolist()
    indptr_all, ids_all, _ = er_small.adjacency_all()
    assert np.array_equal(indptr_all, er_small.offsets)
    assert np.array_equal(ids_all, er_small.neighbors)


def test_first_neighbors(er_small):
    vs = np.flatnonzero(er_small.degrees() > 0)[:20]
    got = er_small.first_neighbors(vs)
    expect = [int(er_small.neighbors_of(int(v))[0]) for v in vs]
    assert got.tolist() == expect


def test_degree_bounds_checked(k4):
    with pytest.raises(DomainError):
        k4.degree(4)
    with pytest.raises(DomainError):
        k4.neighbors_of(-1)
    with pytest.raises(DomainError):
        k4.weights_of(0)  # unweighted


def test_validate_catches_broken_invariants(k4):
    bad = AdjacencyGraph(k4.offsets, k4.neighbors[::-1].copy())
    with pytest.raises(DomainError):
        bad.validate()
    asym = AdjacencyGraph(np.array([0, 1, 2]), np.array([1, 0]))
    asym.validate()
    asym2 = AdjacencyGraph(np.array([0, 1, 1]), np.array([1]))
    with pytest.raises(DomainError):
        asym2.validate()


def test_load_edge_list_basic():
    text = "# friends\n1 2\n2 3\n\n1 3\n"
    g = load_edge_list(text)
    assert g.n == 3
    assert g.m == 3
    # ids compact in order of first appearance: 1->0, 2->1, 3->2
    assert g.neighbors_of(0).tolist() == [1, 2]


def test_load_edge_list_weighted_and_extra_column():
    g = load_edge_list("0 1 7\n1 2 3\n", weighted=True)
    assert g.weighted and g.max_weight == 7
    # unweighted parse ignores a third column
    g2 = load_edge_list("0 1 7\n1 2 3\n")
    assert not g2.weighted


@pytest.mark.parametrize("text,weighted,msg", [
    ("0 1\nx 2\n", False, "line 2"),
    ("0\n", False, "line 1"),
    ("0 1 2 3\n", False, "columns"),
    ("0 -2\n", False, "negative"),
    ("0 1 5\n1 2\n", True, "missing weight"),
    ("0 1 -5\n", True, "negative weight"),
    ("0 1 w\n", True, "non-integer weight"),
])
def test_load_edge_list_errors(text, weighted, msg):
    with pytest.raises(ParseError, match=msg):
        load_edge_list(text, weighted=weighted)


def test_load_edge_list_accepts_bytes():
    g = load_edge_list(b"0 1\n1 2\n")
    assert g.n == 3


def test_graphspec_validation():
    with pytest.raises(DomainError):
        generate(GraphSpec(kind="er", n=10, p=1.5))
    with pytest.raises(DomainError):
        generate(GraphSpec(kind="kronecker", scale=0))
    with pytest.raises(DomainError):
        generate(GraphSpec(kind="mystery", n=3))
    with pytest.raises(DomainError):
        generate(GraphSpec(kind="er", n=4, p=0.5, weighted=True, max_weight=0))


def test_er_generator_determinism_and_density():
    spec = GraphSpec(kind="er", n=400, p=0.02, seed=11)
    g1, g2 = generate(spec), generate(spec)
    assert np.array_equal(g1.offsets, g2.offsets)
    assert np.array_equal(g1.neighbors, g2.neighbors)
    g3 = generate(GraphSpec(kind="er", n=400, p=0.02, seed=12))
    assert not np.array_equal(g1.neighbors, g3.neighbors)
    expect_m = 0.02 * 400 * 399 / 2
    assert 0.6 * expect_m < g1.m < 1.4 * expect_m
    g1.validate()


def test_er_p_one_is_complete():
    g = generate(GraphSpec(kind="er", n=4, p=1.0))
    assert g.m == 6
    assert g.degrees().tolist() == [3, 3, 3, 3]


def test_kronecker_generator():
    spec = GraphSpec(kind="kronecker", scale=8, edge_factor=8, seed=7)
    g1, g2 = generate(spec), generate(spec)
    assert g1.n == 256
    assert np.array_equal(g1.neighbors, g2.neighbors)
    assert 0 < g1.m <= 8 * 256
    g1.validate()
    # skewed degrees: the max degree should dwarf the mean
    assert g1.degrees().max() > 4 * g1.degrees().mean()


def test_weighted_generator_bounds():
    g = generate(GraphSpec(kind="er", n=150, p=0.05, seed=1, weighted=True,
                           max_weight=9))
    assert g.weighted
    assert 1 <= g.weights.min() and g.weights.max() <= 9
    g.validate()
