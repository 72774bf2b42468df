"""Shared fixtures and independent reference implementations.

The references here deliberately avoid the library's vectorized kernels:
plain-Python BFS on a deque, union-find, heapq Dijkstra, dense-matrix
PageRank, and cubic triangle enumeration. Tests compare library output
against these, so a bug in the fast path cannot hide behind itself.
"""

from __future__ import annotations

import heapq
from collections import deque

import numpy as np
import pytest

from adjpack.graph import AdjacencyGraph, GraphSpec, from_edges, generate


# --- reference algorithms ---

def ref_bfs_dist(g, source: int) -> np.ndarray:
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for v in g.neighbors_of(u):
            v = int(v)
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def ref_dijkstra(g, source: int) -> np.ndarray:
    inf = float("inf")
    dist = [inf] * g.n
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        nbrs = g.neighbors_of(u)
        wts = g.weights_of(u) if g.weighted else np.ones(len(nbrs), dtype=np.int64)
        for v, w in zip(nbrs, wts):
            nd = d + int(w)
            if nd < dist[int(v)]:
                dist[int(v)] = nd
                heapq.heappush(heap, (nd, int(v)))
    return np.array([-1 if d == inf else d for d in dist], dtype=np.int64)


def ref_components(g) -> np.ndarray:
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u in range(g.n):
        for v in g.neighbors_of(u):
            ru, rv = find(u), find(int(v))
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
    return np.array([find(x) for x in range(g.n)], dtype=np.int64)


def canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Map arbitrary component labels to the smallest member id per class."""
    labels = np.asarray(labels)
    n = len(labels)
    rep = np.full(n, n, dtype=np.int64)
    np.minimum.at(rep, labels, np.arange(n))
    return rep[labels]


def ref_pagerank(g, damping: float = 0.85, tol: float = 1e-9,
                 max_iters: int = 100) -> np.ndarray:
    """Dense-matrix pull iteration with uniform dangling redistribution."""
    n = g.n
    if n == 0:
        return np.empty(0)
    a = np.zeros((n, n))
    for u in range(n):
        for v in g.neighbors_of(u):
            a[u, int(v)] = 1.0
    deg = a.sum(axis=1)
    pr = np.full(n, 1.0 / n)
    base = (1.0 - damping) / n
    for _ in range(max_iters):
        contrib = np.divide(pr, deg, out=np.zeros(n), where=deg > 0)
        dangling = pr[deg == 0].sum()
        new = base + damping * (a @ contrib + dangling / n)
        delta = np.abs(new - pr).sum()
        pr = new
        if delta < tol:
            break
    return pr


def ref_triangles(g) -> int:
    n = g.n
    adj = np.zeros((n, n), dtype=bool)
    for u in range(n):
        adj[u, g.neighbors_of(u)] = True
    count = 0
    for a in range(n):
        for b in range(a + 1, n):
            if not adj[a, b]:
                continue
            for c in range(b + 1, n):
                if adj[a, c] and adj[b, c]:
                    count += 1
    return count


# --- reference bit utilities ---

def ref_unpack(payload: bytes, count: int, width: int) -> list[int]:
    """Bit-by-bit LSB-first reader, no word tricks."""
    out = []
    for i in range(count):
        val = 0
        for b in range(width):
            bit = i * width + b
            val |= ((payload[bit >> 3] >> (bit & 7)) & 1) << b
        out.append(val)
    return out


# --- graph builders ---

def clique_edges(vertices):
    us, vs = [], []
    verts = list(vertices)
    for i, a in enumerate(verts):
        for b in verts[i + 1:]:
            us.append(a)
            vs.append(b)
    return us, vs


def two_clique_bridge() -> AdjacencyGraph:
    """Two 4-cliques joined by a single edge (0..3 and 4..7, bridge 3-4)."""
    u1, v1 = clique_edges(range(4))
    u2, v2 = clique_edges(range(4, 8))
    return from_edges(u1 + u2 + [3], v1 + v2 + [4])


def two_community(n_half: int, seed: int, p_in: float = 0.3,
                  p_out: float = 0.02) -> AdjacencyGraph:
    """Planted two-community graph; denser inside communities than across."""
    rng = np.random.default_rng(seed)
    us, vs = [], []
    n = 2 * n_half
    for a in range(n):
        for b in range(a + 1, n):
            same = (a < n_half) == (b < n_half)
            if rng.random() < (p_in if same else p_out):
                us.append(a)
                vs.append(b)
    return from_edges(us, vs, n=n)


@pytest.fixture
def k4() -> AdjacencyGraph:
    u, v = clique_edges(range(4))
    return from_edges(u, v)


@pytest.fixture
def path5() -> AdjacencyGraph:
    return from_edges([0, 1, 2, 3], [1, 2, 3, 4])


@pytest.fixture
def er_small() -> AdjacencyGraph:
    return generate(GraphSpec(kind="er", n=120, p=0.05, seed=2))


@pytest.fixture
def er_weighted() -> AdjacencyGraph:
    return generate(GraphSpec(kind="er", n=90, p=0.07, seed=3, weighted=True,
                              max_weight=12))


@pytest.fixture
def kron_small() -> AdjacencyGraph:
    return generate(GraphSpec(kind="kronecker", scale=9, edge_factor=8, seed=5))


def scheme_triples(weighted: bool = False):
    """Every valid (offset, adjacency, permuter) combination."""
    from adjpack.compressed import valid_pairs
    from adjpack.permute import PERMUTER_KINDS
    out = []
    for o_kind, a_kind in valid_pairs(weighted=weighted):
        perms = ("brb",) if a_kind == "brb" else PERMUTER_KINDS
        for p in perms:
            out.append((o_kind, a_kind, p))
    return out
