"""Graph algorithms over the shared query surface.

Everything here talks to a graph through degrees(), adjacency_batch() and
adjacency_all(), so a plain AdjacencyGraph and a CompressedGraph are
interchangeable. Results are deterministic and identical across
representations: ties break toward the smallest vertex ID, and floating
point reductions always run in ascending neighbor order.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

BFS_ALPHA = 15  # top-down -> bottom-up when frontier edges exceed mu/alpha
BFS_BETA = 18  # bottom-up -> top-down when frontier shrinks below n/beta
PR_DAMPING = 0.85
PR_TOL = 1e-9
PR_MAX_ITERS = 100


def _check_source(g, source: int):
    if not 0 <= source < g.n:
        raise DomainError(f"source {source} out of range [0, {g.n})")


def _segment_sums(values: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    cum = np.zeros(len(values) + 1, dtype=values.dtype)
    np.cumsum(values, out=cum[1:])
    return cum[indptr[1:]] - cum[indptr[:-1]]


def bfs(g, source: int, alpha: int = BFS_ALPHA, beta: int = BFS_BETA):
    """Direction-optimizing breadth-first search.

    Returns (parents, dist), both length n with -1 for unreached vertices.
    The parent of a newly found vertex is its smallest neighbor in the
    previous frontier, which makes the tree independent of traversal order.
    """
    _check_source(g, source)
    n = g.n
    parents = np.full(n, -1, dtype=np.int64)
    dist = np.full(n, -1, dtype=np.int64)
    parents[source] = source
    dist[source] = 0
    degs = g.degrees()
    frontier = np.array([source], dtype=np.int64)
    unexplored = int(degs.sum()) - int(degs[source])
    bottom_up = False
    level = 0
    while len(frontier):
        level += 1
        mf = int(degs[frontier].sum())
        if not bottom_up and alpha > 0 and mf * alpha > max(unexplored, 1):
            bottom_up = True
        elif bottom_up and beta > 0 and len(frontier) * beta < n:
            bottom_up = False
        if bottom_up:
            frontier = _bfs_step_bottom_up(g, frontier, parents, dist, level)
        else:
            frontier = _bfs_step_top_down(g, frontier, parents, dist, level)
        unexplored = int(degs[parents < 0].sum())
    return parents, dist


def _bfs_step_top_down(g, frontier, parents, dist, level):
    indptr, ids, _ = g.adjacency_batch(frontier)
    par = np.repeat(frontier, np.diff(indptr))
    fresh = parents[ids] < 0
    child = ids[fresh]
    par = par[fresh]
    if not len(child):
        return child
    order = np.lexsort((par, child))
    child = child[order]
    par = par[order]
    first = np.ones(len(child), dtype=bool)
    first[1:] = child[1:] != child[:-1]
    child = child[first]
    parents[child] = par[first]
    dist[child] = level
    return child


def _bfs_step_bottom_up(g, frontier, parents, dist, level):
    n = g.n
    in_frontier = np.zeros(n, dtype=bool)
    in_frontier[frontier] = True
    # isolated vertices can never be adopted, so don't decode their rows
    unvisited = np.flatnonzero((parents < 0) & (g.degrees() > 0))
    if not len(unvisited):
        return unvisited
    # rows are sorted, so the first entry is the row minimum; when it lands
    # in the frontier it is the deterministic parent and the rest of the row
    # never needs decoding
    f0 = g.first_neighbors(unvisited)
    hit = in_frontier[f0]
    easy = unvisited[hit]
    parents[easy] = f0[hit]
    dist[easy] = level
    rest = unvisited[~hit]
    if not len(rest):
        return easy
    indptr, ids, _ = g.adjacency_batch(rest)
    cand = np.where(in_frontier[ids], ids, n)
    rowmin = np.minimum.reduceat(cand, indptr[:-1])
    got = rowmin < n
    child = rest[got]
    parents[child] = rowmin[got]
    dist[child] = level
    if not len(easy):
        return child
    if not len(child):
        return easy
    return np.sort(np.concatenate([easy, child]))


def pagerank(g, damping: float = PR_DAMPING, tol: float = PR_TOL,
             max_iters: int = PR_MAX_ITERS) -> np.ndarray:
    """Pull-style PageRank; isolated vertices spread their mass uniformly.

    Iterates until the L1 change drops below tol or max_iters is hit. The
    adjacency is decoded fresh every iteration, so the cost of running on a
    compressed graph is the honest per-iteration decode cost.
    """
    n = g.n
    if n == 0:
        return np.empty(0, dtype=np.float64)
    pr = np.full(n, 1.0 / n)
    base = (1.0 - damping) / n
    for _ in range(max_iters):
        indptr, ids, _ = g.adjacency_all()
        deg = np.diff(indptr)
        contrib = np.divide(pr, deg, out=np.zeros(n), where=deg > 0)
        sums = _segment_sums(contrib[ids], indptr)
        dangling = float(pr[deg == 0].sum())
        new = base + damping * (sums + dangling / n)
        delta = float(np.abs(new - pr).sum())
        pr = new
        if delta < tol:
            break
    return pr


def connected_components(g) -> np.ndarray:
    """Label propagation with pointer jumping; labels are component minima."""
    n = g.n
    label = np.arange(n, dtype=np.int64)
    if n == 0:
        return label
    indptr, ids, _ = g.adjacency_all()
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    while True:
        ls = label[src]
        ld = label[ids]
        lo = np.minimum(ls, ld)
        hi = np.maximum(ls, ld)
        changed = bool((lo < hi).any())
        np.minimum.at(label, hi, lo)
        while True:
            nxt = label[label]
            if np.array_equal(nxt, label):
                break
            label = nxt
        if not changed:
            return label


def sssp(g, source: int, delta: int | None = None) -> np.ndarray:
    """Bucketed single-source shortest paths (delta-stepping).

    Unweighted graphs get unit edge weights. Returns distances with -1 for
    unreachable vertices. The default bucket width is the largest edge
    weight, which makes every edge light.
    """
    _check_source(g, source)
    n = g.n
    if delta is None:
        delta = max(1, g.max_weight if g.weighted else 1)
    if delta < 1:
        raise DomainError("delta must be >= 1")
    inf = np.iinfo(np.int64).max // 4
    dist = np.full(n, inf, dtype=np.int64)
    dist[source] = 0
    settled = np.zeros(n, dtype=bool)
    relaxed_at = np.full(n, inf, dtype=np.int64)
    while True:
        rem = (dist < inf) & ~settled
        if not rem.any():
            break
        b = int((dist[rem] // delta).min())
        round_members: list[np.ndarray] = []
        cur = np.flatnonzero(rem & (dist // delta == b))
        while len(cur):
            round_members.append(cur)
            relaxed_at[cur] = dist[cur]
            indptr, ids, w = g.adjacency_batch(cur)
            if w is None:
                w = np.ones(len(ids), dtype=np.int64)
            nd = np.repeat(dist[cur], np.diff(indptr)) + w
            light = w <= delta
            np.minimum.at(dist, ids[light], nd[light])
            cur = np.flatnonzero((dist < inf) & ~settled
                                 & (dist // delta == b) & (dist < relaxed_at))
        members = np.unique(np.concatenate(round_members))
        settled[members] = True
        indptr, ids, w = g.adjacency_batch(members)
        if w is None:
            w = np.ones(len(ids), dtype=np.int64)
        heavy = w > delta
        if heavy.any():
            nd = np.repeat(dist[members], np.diff(indptr)) + w
            np.minimum.at(dist, ids[heavy], nd[heavy])
    out = dist.copy()
    out[out >= inf] = -1
    return out


def triangle_count(g) -> int:
    """Exact triangle count via degree-ordered orientation.

    Each undirected edge is kept only from its lower-ranked endpoint (rank =
    degree with ID tiebreak), then wedges through the oriented lists are
    checked against the oriented edge set.
    """
    n = g.n
    if n == 0:
        return 0
    indptr, ids, _ = g.adjacency_all()
    deg = np.diff(indptr)
    key = deg * np.int64(n + 1) + np.arange(n, dtype=np.int64)
    src = np.repeat(np.arange(n, dtype=np.int64), deg)
    keep = key[src] < key[ids]
    osrc = src[keep]
    odst = ids[keep]
    odeg = np.bincount(osrc, minlength=n).astype(np.int64)
    optr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(odeg, out=optr[1:])
    codes = osrc * np.int64(n) + odst  # already sorted: src asc, dst asc
    # wedges u -> v -> w; triangle iff (u, w) is an oriented edge
    ext = odeg[odst]
    total = int(ext.sum())
    if total == 0:
        return 0
    wedge_u = np.repeat(osrc, ext)
    base = np.repeat(optr[odst], ext)
    offs = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(ext) - ext, ext)
    wedge_w = odst[base + offs]
    wc = wedge_u * np.int64(n) + wedge_w
    at = np.searchsorted(codes, wc)
    at = np.minimum(at, len(codes) - 1)
    return int((codes[at] == wc).sum())
