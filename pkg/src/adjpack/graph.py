"""Adjacency-array graphs: undirected, sorted neighbor arrays, optional weights.

The canonical in-memory form is CSR-like: an offsets array of n+1 entry
indices and a concatenated neighbor array of length 2m (each undirected edge
appears in both endpoint rows). Neighbor rows are sorted ascending, self loops
are dropped on construction, duplicate edges collapse to the minimum weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError


class AdjacencyGraph:
    def __init__(self, offsets, neighbors, weights=None):
        self.offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        self.neighbors = np.ascontiguousarray(neighbors, dtype=np.int64)
        self.weights = None
        if weights is not None:
            self.weights = np.ascontiguousarray(weights, dtype=np.int64)
        self._max_weight = None

    @property
    def n(self) -> int:
        return len(self.offsets) - 1

    @property
    def m(self) -> int:
        return len(self.neighbors) // 2

    @property
    def weighted(self) -> bool:
        return self.weights is not None

    @property
    def max_weight(self) -> int:
        if self.weights is None:
            return 0
        if self._max_weight is None:
            self._max_weight = int(self.weights.max()) if len(self.weights) else 0
        return self._max_weight

    def _check_vertex(self, v: int):
        if not 0 <= v < self.n:
            raise DomainError(f"vertex {v} out of range [0, {self.n})")

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self.offsets[v + 1] - self.offsets[v])

    def neighbors_of(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        return self.neighbors[self.offsets[v] : self.offsets[v + 1]]

    def weights_of(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        if self.weights is None:
            raise DomainError("graph is unweighted")
        return self.weights[self.offsets[v] : self.offsets[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def adjacency_batch(self, vs):
        """Neighborhoods of the given vertices, concatenated.

        Returns (indptr, ids, weights) where ids[indptr[i]:indptr[i+1]] is the
        neighbor row of vs[i]; weights is None for unweighted graphs.
        """
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        if len(vs) and (int(vs.min()) < 0 or int(vs.max()) >= self.n):
            raise DomainError("vertex out of range in adjacency_batch")
        deg = np.diff(self.offsets)[vs] if len(vs) else np.empty(0, dtype=np.int64)
        indptr = np.zeros(len(vs) + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        total = int(indptr[-1])
        if total == 0:
            empty = np.empty(0, dtype=np.int64)
            return indptr, empty, (empty if self.weighted else None)
        flat = np.repeat(self.offsets[vs], deg) + (
            np.arange(total, dtype=np.int64) - np.repeat(indptr[:-1], deg)
        )
        ids = self.neighbors[flat]
        w = self.weights[flat] if self.weighted else None
        return indptr, ids, w

    def adjacency_all(self):
        """Whole graph as (offsets, neighbors, weights) arrays."""
        return self.offsets, self.neighbors, self.weights

    def first_neighbors(self, vs) -> np.ndarray:
        """Smallest neighbor of each given vertex.

        Rows are sorted, so this is the first entry. Every vertex passed in
        must have degree > 0.
        """
        vs = np.ascontiguousarray(vs, dtype=np.int64)
        return self.neighbors[self.offsets[vs]]

    def validate(self):
        """Check structural invariants; raises DomainError on violation."""
        off, nbr = self.offsets, self.neighbors
        if off[0] != 0 or off[-1] != len(nbr):
            raise DomainError("offsets must start at 0 and end at 2m")
        if (np.diff(off) < 0).any():
            raise DomainError("offsets must be non-decreasing")
        if len(nbr):
            if int(nbr.min()) < 0 or int(nbr.max()) >= self.n:
                raise DomainError("neighbor id out of range")
            rows = np.repeat(np.arange(self.n), np.diff(off))
            if (nbr == rows).any():
                raise DomainError("self loop present")
            # sorted within each row: any decrease must be at a row boundary
            dec = np.flatnonzero(np.diff(nbr) <= 0) + 1
            if not np.isin(dec, off).all():
                raise DomainError("neighbor rows must be strictly increasing")
            w = self.weights if self.weighted else np.zeros(len(nbr), dtype=np.int64)
            if self.weighted and (w < 0).any():
                raise DomainError("negative weight")
            fwd = np.lexsort((w, nbr, rows))
            rev = np.lexsort((w, rows, nbr))
            ok = (rows[fwd] == nbr[rev]).all() and (nbr[fwd] == rows[rev]).all()
            if self.weighted:
                ok = ok and (w[fwd] == w[rev]).all()
            if not ok:
                raise DomainError("adjacency is not symmetric")
        if self.weighted and len(self.weights) != len(nbr):
            raise DomainError("weights length must match neighbors")


def from_edges(u, v, w=None, n=None) -> AdjacencyGraph:
    """Build a graph from undirected edge endpoint arrays.

    Self loops are dropped, duplicates collapse to the minimum weight, both
    directions are materialized. `n` defaults to max id + 1.
    """
    u = np.ascontiguousarray(u, dtype=np.int64)
    v = np.ascontiguousarray(v, dtype=np.int64)
    weighted = w is not None
    w = np.ascontiguousarray(w, dtype=np.int64) if weighted else None
    if len(u) != len(v) or (weighted and len(w) != len(u)):
        raise DomainError("edge arrays must have equal length")
    if len(u) and (int(min(u.min(), v.min())) < 0):
        raise DomainError("negative vertex id")
    if weighted and len(w) and int(w.min()) < 0:
        raise DomainError("negative edge weight")
    if n is None:
        n = int(max(u.max(), v.max())) + 1 if len(u) else 0
    elif len(u) and int(max(u.max(), v.max())) >= n:
        raise DomainError("vertex id exceeds n")
    keep = u != v
    u, v = u[keep], v[keep]
    if weighted:
        w = w[keep]
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    ww = np.concatenate([w, w]) if weighted else np.zeros(len(src), dtype=np.int64)
    order = np.lexsort((ww, dst, src))
    src, dst, ww = src[order], dst[order], ww[order]
    if len(src):
        first = np.empty(len(src), dtype=bool)
        first[0] = True
        first[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        src, dst, ww = src[first], dst[first], ww[first]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    return AdjacencyGraph(offsets, dst, ww if weighted else None)


def load_edge_list(lines, weighted: bool = False) -> AdjacencyGraph:
    """Parse a text edge list: one `u v` or `u v w` per line, `#` comments.

    Vertex ids are compacted to 0..n-1 in order of first appearance. With
    weighted=True every edge line must carry a weight column; without it a
    third column is ignored.
    """
    if isinstance(lines, (str, bytes)):
        lines = lines.splitlines()
    ids: dict[int, int] = {}
    us, vs, ws = [], [], []
    for lineno, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            line = line.decode()
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) < 2 or len(parts) > 3:
            raise ParseError(f"line {lineno}: expected 2 or 3 columns, got {len(parts)}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer vertex id") from None
        if a < 0 or b < 0:
            raise ParseError(f"line {lineno}: negative vertex id")
        if weighted:
            if len(parts) != 3:
                raise ParseError(f"line {lineno}: missing weight column")
            try:
                wt = int(parts[2])
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer weight") from None
            if wt < 0:
                raise ParseError(f"line {lineno}: negative weight")
            ws.append(wt)
        for x in (a, b):
            if x not in ids:
                ids[x] = len(ids)
        us.append(ids[a])
        vs.append(ids[b])
    n = len(ids)
    return from_edges(
        np.array(us, dtype=np.int64),
        np.array(vs, dtype=np.int64),
        np.array(ws, dtype=np.int64) if weighted else None,
        n=n,
    )


@dataclass
class GraphSpec:
    """Parameters for the synthetic generators."""

    kind: str  # "er" or "kronecker"
    n: int = 0  # er vertex count
    p: float = 0.0  # er edge probability
    scale: int = 0  # kronecker: n = 2**scale
    edge_factor: int = 16  # kronecker: samples = edge_factor * n
    seed: int = 0
    weighted: bool = False
    max_weight: int = 255

    def validate(self):
        if self.kind == "er":
            if self.n < 0:
                raise DomainError("er: n must be non-negative")
            if not 0.0 <= self.p <= 1.0:
                raise DomainError("er: p must be in [0, 1]")
        elif self.kind == "kronecker":
            if self.scale < 1:
                raise DomainError("kronecker: scale must be >= 1")
            if self.edge_factor < 1:
                raise DomainError("kronecker: edge_factor must be >= 1")
        else:
            raise DomainError(f"unknown generator kind {self.kind!r}")
        if self.weighted and self.max_weight < 1:
            raise DomainError("max_weight must be >= 1 for weighted graphs")


# RMAT corner probabilities for the kronecker generator
_KRON_PROBS = (0.57, 0.19, 0.19, 0.05)


def _pair_index_to_edge(k: np.ndarray, n: int):
    # pair index over (u < v) ordered by u then v; row u starts at
    # C_u = u*n - u*(u+1)/2 - u ... solved via the quadratic formula
    kf = k.astype(np.float64)
    u = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8 * kf)) / 2).astype(np.int64)
    # float round-off can land one row off; nudge into place
    row_start = u * (2 * n - u - 1) // 2
    too_far = row_start > k
    u[too_far] -= 1
    row_start = u * (2 * n - u - 1) // 2
    next_start = (u + 1) * (2 * n - u - 2) // 2
    over = k >= next_start
    u[over] += 1
    row_start = u * (2 * n - u - 1) // 2
    v = k - row_start + u + 1
    return u, v


def generate(spec: GraphSpec) -> AdjacencyGraph:
    """Generate a graph from a seeded model; identical bytes for equal specs."""
    spec.validate()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    if spec.kind == "er":
        u, v = _generate_er(spec, rng)
    else:
        u, v = _generate_kronecker(spec, rng)
    w = None
    if spec.weighted:
        w = rng.integers(1, spec.max_weight + 1, size=len(u), dtype=np.int64)
    n = spec.n if spec.kind == "er" else 1 << spec.scale
    return from_edges(u, v, w, n=n)


def _generate_er(spec: GraphSpec, rng) -> tuple[np.ndarray, np.ndarray]:
    n, p = spec.n, spec.p
    total_pairs = n * (n - 1) // 2
    if total_pairs == 0 or p == 0.0:
        e = np.empty(0, dtype=np.int64)
        return e, e
    # geometric skipping: gap between successive picks ~ Geometric(p), which
    # reproduces independent Bernoulli(p) over the pair enumeration in O(m)
    picks = []
    pos = -1
    batch = max(1024, int(total_pairs * p * 1.1) + 64)
    while pos < total_pairs:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps)
        picks.append(idx[idx < total_pairs])
        if len(picks[-1]) < len(idx):
            break
        pos = int(idx[-1])
    k = np.concatenate(picks)
    return _pair_index_to_edge(k, n)


def _generate_kronecker(spec: GraphSpec, rng) -> tuple[np.ndarray, np.ndarray]:
    n = 1 << spec.scale
    count = spec.edge_factor * n
    cum = np.cumsum(_KRON_PROBS)
    u = np.zeros(count, dtype=np.int64)
    v = np.zeros(count, dtype=np.int64)
    for level in range(spec.scale):
        quad = np.searchsorted(cum, rng.random(count), side="right")
        u |= (quad >> 1) << level
        v |= (quad & 1) << level
    return u, v
