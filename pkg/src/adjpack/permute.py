"""Vertex relabeling: heuristics that shrink encoded adjacency sizes.

A Permutation maps old labels to new ones; apply() rebuilds the graph under
the new labels with neighbor rows re-sorted. The heuristics:

  identity    keep labels
  degmin      descending degree, ties by old id (hubs get small labels)
  greedy      ascending-degree scan handing labels to unvisited neighbors,
              aimed at the sum of per-neighborhood max labels over degree
  rb          inorder leaf labels of a full recursive bisection
  brb         bisection to depth k; labels grouped by k-bit part prefix

bisect() builds the separator tree with BFS-grown seeds refined by
best-gain move passes (lock after move, roll back to the best prefix), all
driven by a seeded generator so results are reproducible.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

from .bitio import bits_for
from .errors import DomainError
from .graph import AdjacencyGraph

PERMUTER_KINDS = ("identity", "degmin", "greedy", "rb", "brb")


@dataclass
class Permutation:
    forward: np.ndarray  # forward[old] = new
    scheme: str = "identity"
    _inverse: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.forward)

    def validate(self):
        f = self.forward
        seen = np.zeros(len(f), dtype=bool)
        if len(f) and (f.min() < 0 or f.max() >= len(f)):
            raise DomainError("permutation image out of range")
        seen[f] = True
        if not seen.all():
            raise DomainError("permutation is not a bijection")

    def inverse(self) -> np.ndarray:
        if self._inverse is None:
            inv = np.empty(len(self.forward), dtype=np.int64)
            inv[self.forward] = np.arange(len(self.forward), dtype=np.int64)
            self._inverse = inv
        return self._inverse


def identity_permutation(n: int) -> Permutation:
    return Permutation(np.arange(n, dtype=np.int64), "identity")


def degree_min(g: AdjacencyGraph) -> Permutation:
    """Highest degree gets label 0; ties broken by ascending old id."""
    order = np.argsort(-g.degrees(), kind="stable")
    forward = np.empty(g.n, dtype=np.int64)
    forward[order] = np.arange(g.n, dtype=np.int64)
    return Permutation(forward, "degmin")


def greedy_relabel(g: AdjacencyGraph) -> Permutation:
    """Scan vertices by ascending degree, label their unvisited neighbors.

    Vertices never reached as someone's neighbor take the remaining labels
    in ascending old-id order.
    """
    n = g.n
    order = np.argsort(g.degrees(), kind="stable")
    off, nbr, _ = g.adjacency_all()
    offl = off.tolist()
    nbrl = nbr.tolist()
    forward = [-1] * n
    nl = 0
    for v in order.tolist():
        for u in nbrl[offl[v] : offl[v + 1]]:
            if forward[u] < 0:
                forward[u] = nl
                nl += 1
    for v in range(n):
        if forward[v] < 0:
            forward[v] = nl
            nl += 1
    return Permutation(np.array(forward, dtype=np.int64), "greedy")


def apply(g: AdjacencyGraph, p: Permutation) -> AdjacencyGraph:
    """Rebuild the graph under new labels, neighbor rows re-sorted."""
    if len(p) != g.n:
        raise DomainError("permutation length does not match graph")
    off, nbr, w = g.adjacency_all()
    deg = np.diff(off)
    rows = np.repeat(np.arange(g.n, dtype=np.int64), deg)
    src = p.forward[rows]
    dst = p.forward[nbr]
    order = np.lexsort((dst, src))
    new_off = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=g.n), out=new_off[1:])
    return AdjacencyGraph(new_off, dst[order], w[order] if w is not None else None)


def _as_forward(p) -> np.ndarray:
    return p.forward if isinstance(p, Permutation) else np.ascontiguousarray(p, dtype=np.int64)


def objective_max_id(g: AdjacencyGraph, p) -> float:
    """Sum over nonempty vertices of max(new neighbor label) / degree."""
    f = _as_forward(p)
    off, nbr, _ = g.adjacency_all()
    deg = np.diff(off)
    nz = deg > 0
    if not nz.any():
        return 0.0
    row_max = np.maximum.reduceat(f[nbr], off[:-1][nz])
    return float((row_max / deg[nz]).sum())


def objective_gap_sum(g: AdjacencyGraph, p) -> int:
    """Total stored gap magnitude under the relabeling.

    Per nonempty vertex: |min - new(v)| + (max - min), which equals the sum
    of first-gap magnitude plus consecutive differences once the row is
    re-sorted by new labels.
    """
    f = _as_forward(p)
    off, nbr, _ = g.adjacency_all()
    deg = np.diff(off)
    nz = deg > 0
    if not nz.any():
        return 0
    pn = f[nbr]
    starts = off[:-1][nz]
    row_max = np.maximum.reduceat(pn, starts)
    row_min = np.minimum.reduceat(pn, starts)
    vlab = f[np.flatnonzero(nz)]
    return int((np.abs(row_min - vlab) + (row_max - row_min)).sum())


def brute_force_opt(g: AdjacencyGraph, objective) -> tuple[Permutation, float]:
    """Exhaustive search over all labelings; n <= 9 only.

    Returns the first (lexicographically smallest) permutation achieving the
    minimum objective value.
    """
    n = g.n
    if n > 9:
        raise DomainError("brute force search limited to n <= 9")
    best_val = None
    best = None
    for perm in itertools.permutations(range(n)):
        f = np.array(perm, dtype=np.int64)
        val = objective(g, f)
        if best_val is None or val < best_val - 1e-12:
            best_val = val
            best = f
    if best is None:
        return identity_permutation(n), 0.0
    return Permutation(best, "brute"), float(best_val)


# --- recursive bisection ---

@dataclass
class SeparatorTree:
    n: int
    depth: int  # number of levels with recorded split bits
    bits: np.ndarray  # (depth, n) uint8; rows beyond a vertex's leaf stay 0
    leaf_depth: np.ndarray  # level at which each vertex's part stopped splitting
    seed: int
    imbalance: float


def bisect(g: AdjacencyGraph, depth: int | None = None, imbalance: float = 0.0,
           seed: int = 0) -> SeparatorTree:
    """Recursively bisect the graph into a separator tree.

    Splits stop at singletons or after `depth` levels (None = go all the
    way down). Each split's sides differ by at most max(1, floor(imbalance *
    part size)) vertices.
    """
    if imbalance < 0 or imbalance > 1:
        raise DomainError("imbalance must be in [0, 1]")
    n = g.n
    cap = depth if depth is not None else max(1, 2 * n.bit_length())
    rng = np.random.Generator(np.random.PCG64(seed))
    rows: list[np.ndarray] = []
    leaf_depth = np.zeros(n, dtype=np.int64)
    stack = [(np.arange(n, dtype=np.int64), 0)]
    while stack:
        part, level = stack.pop()
        if len(part) <= 1 or level >= cap:
            leaf_depth[part] = level
            continue
        side = _bisect_once(g, part, imbalance, rng)
        if level == len(rows):
            rows.append(np.zeros(n, dtype=np.uint8))
        rows[level][part] = side
        stack.append((part[side == 1], level + 1))
        stack.append((part[side == 0], level + 1))
    bits = np.array(rows, dtype=np.uint8) if rows else np.zeros((0, n), dtype=np.uint8)
    return SeparatorTree(n, len(rows), bits, leaf_depth, seed, imbalance)


def _part_csr(g: AdjacencyGraph, part: np.ndarray):
    """Adjacency induced on `part` (ascending old ids), with local indices."""
    inpart = np.zeros(g.n, dtype=bool)
    inpart[part] = True
    indptr, ids, _ = g.adjacency_batch(part)
    keep = inpart[ids]
    ck = np.zeros(len(ids) + 1, dtype=np.int64)
    np.cumsum(keep, out=ck[1:])
    cnt = ck[indptr[1:]] - ck[indptr[:-1]]
    lptr = np.zeros(len(part) + 1, dtype=np.int64)
    np.cumsum(cnt, out=lptr[1:])
    ladj = np.searchsorted(part, ids[keep])
    return lptr, ladj


def _bfs_grow(lptr, ladj, k: int, target: int, seed_local: int) -> np.ndarray:
    """Grow a BFS region of `target` vertices; returns uint8 sides (0=grown)."""
    side = np.ones(k, dtype=np.uint8)
    seen = [False] * k
    lptr_l = lptr.tolist()
    ladj_l = ladj.tolist()
    queue = [seed_local]
    seen[seed_local] = True
    grown = 0
    qi = 0
    nxt = 0  # lowest never-seen local index, for component jumps
    while grown < target:
        if qi >= len(queue):
            while nxt < k and seen[nxt]:
                nxt += 1
            if nxt >= k:
                break
            queue.append(nxt)
            seen[nxt] = True
        v = queue[qi]
        qi += 1
        side[v] = 0
        grown += 1
        for u in ladj_l[lptr_l[v] : lptr_l[v + 1]]:
            if not seen[u]:
                seen[u] = True
                queue.append(u)
    return side


def _bisect_once(g: AdjacencyGraph, part: np.ndarray, imbalance: float, rng) -> np.ndarray:
    k = len(part)
    slack = max(1, int(imbalance * k))
    lptr, ladj = _part_csr(g, part)
    seed_local = int(rng.integers(k))
    side = _bfs_grow(lptr, ladj, k, (k + 1) // 2, seed_local)

    lptr_l = lptr.tolist()
    ladj_l = ladj.tolist()
    part_l = part.tolist()
    max_passes = 16
    cut = _cut_size(lptr, ladj, side)
    for _ in range(max_passes):
        start_cut = cut
        cut = _fm_pass(lptr_l, ladj_l, part_l, side, slack, cut)
        if cut >= start_cut:
            break
    return side


def _cut_size(lptr, ladj, side) -> int:
    rows = np.repeat(np.arange(len(lptr) - 1), np.diff(lptr))
    return int((side[ladj] != side[rows]).sum()) // 2


def _fm_pass(lptr, ladj, part_ids, side, slack: int, cut: int) -> int:
    """One refinement pass; mutates `side`, returns the best cut reached."""
    k = len(part_ids)
    gain = [0] * k
    for v in range(k):
        sv = side[v]
        ext = 0
        for u in ladj[lptr[v] : lptr[v + 1]]:
            ext += 1 if side[u] != sv else -1
        gain[v] = ext
    locked = [False] * k
    heaps = ([], [])  # per current side; entries (-gain, old id, local v)
    for v in range(k):
        heapq.heappush(heaps[side[v]], (-gain[v], part_ids[v], v))
    s0 = int(np.count_nonzero(side == 0))
    s1 = k - s0
    moves: list[int] = []
    best_cut, best_len = cut, 0

    def _top(s):
        h = heaps[s]
        while h and (locked[h[0][2]] or side[h[0][2]] != s or -h[0][0] != gain[h[0][2]]):
            heapq.heappop(h)
        return h[0] if h else None

    while True:
        can0 = abs((s0 - 1) - (s1 + 1)) <= slack  # move a side-0 vertex over
        can1 = abs((s0 + 1) - (s1 - 1)) <= slack
        t0 = _top(0) if can0 else None
        t1 = _top(1) if can1 else None
        if t0 is None and t1 is None:
            break
        if t1 is None or (t0 is not None and t0 <= t1):
            entry, frm = t0, 0
        else:
            entry, frm = t1, 1
        heapq.heappop(heaps[frm])
        v = entry[2]
        cut -= gain[v]
        side[v] ^= 1
        locked[v] = True
        if frm == 0:
            s0 -= 1
            s1 += 1
        else:
            s0 += 1
            s1 -= 1
        for u in ladj[lptr[v] : lptr[v + 1]]:
            if locked[u]:
                continue
            gain[u] += 2 if side[u] == side[v] else -2
            heapq.heappush(heaps[side[u]], (-gain[u], part_ids[u], u))
        moves.append(v)
        if cut < best_cut:
            best_cut, best_len = cut, len(moves)
    for v in moves[best_len:]:
        side[v] ^= 1
    return best_cut


def rb_permutation(tree: SeparatorTree) -> Permutation:
    """Inorder leaf labels of a fully split separator tree."""
    if tree.n > 1 and (tree.depth == 0 or _has_duplicate_leaves(tree)):
        raise DomainError("rb needs a bisection down to singleton leaves")
    keys = tuple(tree.bits[l] for l in reversed(range(tree.depth)))
    order = np.lexsort(keys) if tree.depth else np.arange(tree.n)
    forward = np.empty(tree.n, dtype=np.int64)
    forward[order] = np.arange(tree.n, dtype=np.int64)
    return Permutation(forward, "rb")


def _has_duplicate_leaves(tree: SeparatorTree) -> bool:
    cols = tree.bits.T
    seen = {}
    for v in range(tree.n):
        key = cols[v].tobytes()
        if key in seen:
            return True
        seen[key] = v
    return False


@dataclass
class BrbLabeling:
    """brb labels: new id = part_start[prefix] + rank inside the part."""

    depth: int
    part_sizes: np.ndarray  # 2^depth entries
    part_start: np.ndarray  # 2^depth + 1 entries
    suffix_width: int
    permutation: Permutation

    def prefix_of(self, new_id: int) -> int:
        return int(np.searchsorted(self.part_start, new_id, side="right")) - 1


def brb_labels(tree: SeparatorTree, depth: int) -> BrbLabeling:
    """Group labels by the first `depth` separator bits."""
    if depth < 1:
        raise DomainError("brb depth must be >= 1")
    if depth > 30:
        raise DomainError("brb depth too large")
    n = tree.n
    prefix = np.zeros(n, dtype=np.int64)
    for l in range(min(depth, tree.depth)):
        prefix |= tree.bits[l].astype(np.int64) << (depth - 1 - l)
    part_sizes = np.bincount(prefix, minlength=1 << depth)
    part_start = np.zeros((1 << depth) + 1, dtype=np.int64)
    np.cumsum(part_sizes, out=part_start[1:])
    order = np.lexsort((np.arange(n), prefix))
    forward = np.empty(n, dtype=np.int64)
    forward[order] = np.arange(n, dtype=np.int64)
    suffix_width = bits_for(max(0, int(part_sizes.max()) - 1)) if n else 1
    return BrbLabeling(depth, part_sizes, part_start, suffix_width,
                       Permutation(forward, "brb"))


def make_permutation(g: AdjacencyGraph, scheme: str, seed: int = 0,
                     imbalance: float = 0.0, brb_depth: int = 4):
    """Dispatcher used by the compression pipeline.

    Returns (Permutation, BrbLabeling or None).
    """
    if scheme == "identity":
        return identity_permutation(g.n), None
    if scheme == "degmin":
        return degree_min(g), None
    if scheme == "greedy":
        return greedy_relabel(g), None
    if scheme == "rb":
        tree = bisect(g, depth=None, imbalance=imbalance, seed=seed)
        return rb_permutation(tree), None
    if scheme == "brb":
        tree = bisect(g, depth=brb_depth, imbalance=imbalance, seed=seed)
        lab = brb_labels(tree, brb_depth)
        return lab.permutation, lab
    raise DomainError(f"unknown permuter {scheme!r}")
