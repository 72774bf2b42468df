"""Fine-grained width selection for adjacency entries, and size accounting.

A neighborhood can store its entries at the width the whole graph needs
(global), or at the width its own largest value needs (local), in which case
the width is recorded in a small fixed header next to the offset. Entries are
either absolute IDs or gaps: the first gap is zigzag(first_neighbor - v), the
rest are plain positive differences, and in gap mode the neighborhood's
largest encoded gap dictates the width.

Also here: the analytic size model for hierarchical vertex IDs and the
word-RAM cost model for the access paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bitio import bits_for, bits_for_array, zigzag_decode, zigzag_encode
from .errors import ConfigError, DomainError

ID_MODES = ("global", "local")
GAP_MODES = ("absolute", "fixed_gap")
WEIGHT_MODES = ("none", "global_width", "local_width")


@dataclass(frozen=True)
class FineScheme:
    id_mode: str = "global"
    gap_mode: str = "absolute"
    weight_mode: str = "none"

    def validate(self):
        if self.id_mode not in ID_MODES:
            raise ConfigError(f"id_mode must be one of {ID_MODES}")
        if self.gap_mode not in GAP_MODES:
            raise ConfigError(f"gap_mode must be one of {GAP_MODES}")
        if self.weight_mode not in WEIGHT_MODES:
            raise ConfigError(f"weight_mode must be one of {WEIGHT_MODES}")

    @property
    def local_ids(self) -> bool:
        return self.id_mode == "local"

    @property
    def gaps(self) -> bool:
        return self.gap_mode == "fixed_gap"

    @property
    def weighted(self) -> bool:
        return self.weight_mode != "none"

    def tag(self) -> str:
        base = {"global": "global", "local": "local"}[self.id_mode]
        if self.gaps:
            base += "-gap"
        return base


@dataclass(frozen=True)
class FineContext:
    """Graph-wide constants the global widths derive from."""

    n: int
    max_weight: int = 0
    global_gap_max: int = 0  # largest encoded gap value across the graph

    @property
    def global_id_width(self) -> int:
        return bits_for(max(0, self.n - 1))

    @property
    def global_gap_width(self) -> int:
        return bits_for(self.global_gap_max)

    @property
    def global_weight_width(self) -> int:
        return bits_for(self.max_weight)


def ceil_log2(x) -> int:
    """ceil(log2(x)) for integer x >= 1; 0 for x <= 1."""
    if x < 1:
        raise DomainError("ceil_log2 needs x >= 1")
    return (int(x) - 1).bit_length()


def ceil_log2_log2(x: int) -> int:
    """ceil(log2(log2(x))) for integer x >= 1; 0 when log2(x) <= 1."""
    if x < 1:
        raise DomainError("ceil_log2_log2 needs x >= 1")
    if x <= 2:
        return 0
    return max(0, math.ceil(math.log2(math.log2(x))))


def ceil_log2_ratio(a: int, b: int) -> int:
    """ceil(log2(a / b)) for positive integers, exact."""
    if a < 1 or b < 1:
        raise DomainError("ceil_log2_ratio needs positive integers")
    k = 0
    while (b << k) < a:
        k += 1
    return k


def gap_encode(v: int, ids: np.ndarray) -> np.ndarray:
    """Neighborhood IDs -> encoded gap values (zigzag first, then diffs)."""
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    out = np.empty(len(ids), dtype=np.uint64)
    if len(ids) == 0:
        return out
    out[0] = zigzag_encode(int(ids[0]) - v)
    out[1:] = np.diff(ids).astype(np.uint64)
    return out


def gap_decode(v: int, gaps: np.ndarray) -> np.ndarray:
    gaps = np.ascontiguousarray(gaps, dtype=np.uint64)
    if len(gaps) == 0:
        return np.empty(0, dtype=np.int64)
    out = np.empty(len(gaps), dtype=np.int64)
    out[0] = v + zigzag_decode(int(gaps[0]))
    if len(gaps) > 1:
        out[1:] = gaps[1:].astype(np.int64)
        np.cumsum(out, out=out)
    return out


def all_gap_values(offsets, neighbors) -> np.ndarray:
    """Encoded gap values for every entry of a CSR adjacency, in layout order."""
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    nbr = np.ascontiguousarray(neighbors, dtype=np.int64)
    out = np.empty(len(nbr), dtype=np.int64)
    if len(nbr) == 0:
        return out.astype(np.uint64)
    out[0] = 0
    out[1:] = nbr[1:] - nbr[:-1]
    deg = np.diff(offsets)
    nz = deg > 0
    starts = offsets[:-1][nz]
    vs = np.flatnonzero(nz)
    first = nbr[starts] - vs
    out[starts] = np.where(first >= 0, 2 * first, -2 * first - 1)
    return out.astype(np.uint64)


def entry_values(scheme: FineScheme, v: int, ids) -> np.ndarray:
    """The raw unsigned values a neighborhood stores for its ID fields."""
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    if scheme.gaps:
        return gap_encode(v, ids)
    return ids.astype(np.uint64)


def id_width(scheme: FineScheme, ctx: FineContext, values: np.ndarray) -> int:
    """Field width for the ID/gap entries of one neighborhood."""
    if scheme.id_mode == "global":
        return ctx.global_gap_width if scheme.gaps else ctx.global_id_width
    if len(values) == 0:
        return 1
    return bits_for(int(values.max()))

def weight_width(scheme: FineScheme, ctx: FineContext, weights) -> int:
    if scheme.weight_mode == "global_width":
        return ctx.global_weight_width
    w = np.ascontiguousarray(weights, dtype=np.int64)
    if len(w) == 0:
        return 1
    return bits_for(int(w.max()))


def max_id_field_width(scheme: FineScheme, ctx: FineContext) -> int:
    """Largest ID/gap width any neighborhood of the graph could need."""
    if scheme.gaps:
        # first-gap zigzag of +-(n-1) tops out at 2(n-1)
        return bits_for(max(0, 2 * (ctx.n - 1)))
    return ctx.global_id_width


def header_field_bits(scheme: FineScheme, ctx: FineContext) -> tuple[int, int]:
    """(id header bits, weight header bits) per vertex; 0 when absent.

    Local widths are stored as (width - 1) in a fixed field sized for the
    largest width the scheme could produce, which is the ceil(log2 log2 n)
    field of the size model.
    """
    idh = 0
    if scheme.local_ids:
        idh = bits_for(max_id_field_width(scheme, ctx) - 1)
    wh = 0
    if scheme.weight_mode == "local_width":
        wh = bits_for(ctx.global_weight_width - 1)
    return idh, wh


@dataclass
class NeighborhoodBlock:
    """One encoded neighborhood: interleaved values plus its widths."""

    id_width: int
    weight_width: int  # 0 when unweighted
    values: np.ndarray  # uint64, [id, (w,) id, (w,) ...]
    header: tuple | None  # (id_width-1[, weight_width-1]) for local modes

    @property
    def bit_length(self) -> int:
        stride = self.id_width + self.weight_width
        per = 2 if self.weight_width else 1
        return (len(self.values) // per) * stride


def encode_neighborhood(v: int, ids, scheme: FineScheme, ctx: FineContext,
                        weights=None) -> NeighborhoodBlock:
    scheme.validate()
    if scheme.weighted and weights is None:
        raise ConfigError("scheme requires weights")
    vals = entry_values(scheme, v, ids)
    idw = id_width(scheme, ctx, vals)
    ww = 0
    if scheme.weighted:
        ww = weight_width(scheme, ctx, weights)
        inter = np.empty(2 * len(vals), dtype=np.uint64)
        inter[0::2] = vals
        inter[1::2] = np.ascontiguousarray(weights, dtype=np.uint64)
        vals = inter
    header = None
    if scheme.local_ids or scheme.weight_mode == "local_width":
        header = (idw - 1,) if scheme.local_ids else ()
        if scheme.weight_mode == "local_width":
            header = header + (ww - 1,)
    return NeighborhoodBlock(idw, ww, vals, header)


def decode_neighborhood(v: int, block: NeighborhoodBlock, scheme: FineScheme):
    """Inverse of encode_neighborhood; returns (ids, weights or None)."""
    vals = block.values
    weights = None
    if block.weight_width:
        weights = vals[1::2].astype(np.int64)
        vals = vals[0::2]
    if scheme.gaps:
        ids = gap_decode(v, vals)
    else:
        ids = vals.astype(np.int64)
    return ids, weights


def fine_size_bits(g, scheme: FineScheme) -> dict:
    """Size accounting for a fixed-width scheme over a whole graph.

    formula_bits is the idealized model (real ceil-log terms, no 1-bit
    floors, per-vertex log-log headers); encoded_bits is what the encoder
    emits (floored widths, fixed header fields). The difference is itemized
    and encoded == formula + sum(items) holds exactly.
    """
    scheme.validate()
    if scheme.weighted and not g.weighted:
        raise ConfigError("weighted scheme on an unweighted graph")
    offsets, neighbors, gweights = g.adjacency_all()
    n = g.n
    deg = np.diff(offsets)
    nz = deg > 0
    ctx = FineContext(n=n, max_weight=g.max_weight,
                      global_gap_max=_global_gap_max(offsets, neighbors))

    if scheme.gaps:
        vals = all_gap_values(offsets, neighbors).astype(np.int64)
    else:
        vals = neighbors
    # per-neighborhood max entry value (nonempty rows only)
    if nz.any():
        row_max = np.maximum.reduceat(vals, offsets[:-1][nz])
    else:
        row_max = np.empty(0, dtype=np.int64)
    dnz = deg[nz]

    if scheme.id_mode == "global":
        enc_w = np.full(len(dnz), ctx.global_gap_width if scheme.gaps
                        else ctx.global_id_width, dtype=np.int64)
        base = (ctx.global_gap_max + 1) if scheme.gaps else max(1, n)
        formula_w = np.full(len(dnz), ceil_log2(base), dtype=np.int64)
    else:
        enc_w = np.maximum(1, _bits_for_arr(row_max))
        formula_w = _ceil_log2_arr(row_max + 1)
    payload_id = int((dnz * enc_w).sum())
    formula_id = int((dnz * formula_w).sum())

    idh, wh = header_field_bits(scheme, ctx)
    header_bits = n * idh + n * wh
    formula_header = 0
    if scheme.local_ids:
        formula_header += int(_ceil_loglog_arr(row_max + 1).sum())
    if scheme.weight_mode == "local_width":
        formula_header += int(nz.sum()) * ceil_log2_log2(max(1, g.max_weight))

    payload_wt = formula_wt = weight_delta = 0
    if scheme.weighted:
        w_clog = ceil_log2(max(1, g.max_weight))
        formula_wt = int(2 * g.m) * w_clog
        if scheme.weight_mode == "global_width":
            payload_wt = int(2 * g.m) * ctx.global_weight_width
        else:
            wrow_max = np.maximum.reduceat(gweights, offsets[:-1][nz]) \
                if nz.any() else np.empty(0, dtype=np.int64)
            enc_ww = np.maximum(1, _bits_for_arr(wrow_max))
            payload_wt = int((dnz * enc_ww).sum())
            weight_delta = payload_wt - formula_wt

    formula = formula_id + formula_header + formula_wt
    encoded = payload_id + payload_wt + header_bits
    items = {
        "floor_slack": payload_id - formula_id,
        "header_slack": header_bits - formula_header,
        "weight_floor_slack": (payload_wt - formula_wt) if scheme.weight_mode == "global_width" else 0,
        "weight_width_delta": weight_delta,
    }
    return {
        "scheme": scheme.tag() + ("" if not scheme.weighted else f"+w({scheme.weight_mode})"),
        "formula_bits": formula,
        "encoded_bits": encoded,
        "payload_bits": payload_id + payload_wt,
        "header_bits": header_bits,
        "items": items,
    }


def _global_gap_max(offsets, neighbors) -> int:
    if len(neighbors) == 0:
        return 0
    return int(all_gap_values(offsets, neighbors).max())


def _bits_for_arr(x: np.ndarray) -> np.ndarray:
    return bits_for_array(x)


def _ceil_log2_arr(x: np.ndarray) -> np.ndarray:
    # ceil(log2(x)) for x >= 1, exact: bit_length(x-1)
    return _bits_for_arr(np.maximum(x - 1, 0)) * (x > 1)


def _ceil_loglog_arr(x: np.ndarray) -> np.ndarray:
    out = np.zeros(len(x), dtype=np.int64)
    big = x > 2
    if big.any():
        out[big] = np.ceil(np.log2(np.log2(x[big].astype(np.float64))))
    return np.maximum(out, 0)


# --- hierarchical ID size model ---

def hierarchical_size_flat(n: int, nodes: int) -> int:
    """Bits for n vertex IDs split as (local id, node id) over `nodes` machines."""
    if n < 1 or nodes < 1:
        raise DomainError("n and nodes must be positive")
    return n * ceil_log2_ratio(n, nodes) + nodes * ceil_log2(nodes)


def hierarchical_size_multi(n: int, level_counts) -> int:
    """Bits for a multi-level hierarchy; level_counts = (H_1=1, ..., H_N)."""
    counts = list(level_counts)
    if not counts or counts[0] != 1:
        raise DomainError("level_counts must start with the root level (1)")
    if any(c < 1 for c in counts):
        raise DomainError("level counts must be positive")
    if n < 1:
        raise DomainError("n must be positive")
    h_last = counts[-1]
    total = n * ceil_log2_ratio(n, h_last)
    for h in counts[1:-1]:
        total += h * ceil_log2(h)
    return total


# --- word-RAM cost model for the access paths ---

@dataclass(frozen=True)
class CostParams:
    t_cm: float = 1.0  # cache-line access
    t_mul: float = 1.0
    t_shf: float = 1.0
    t_and: float = 1.0
    t_bxr: float = 1.0
    t_add: float = 1.0
    t_sub: float = 1.0


def edge_cost(p: CostParams) -> float:
    """Cost of fetching one adjacency entry by index."""
    return 2 * p.t_cm + p.t_mul + p.t_shf + p.t_and + p.t_bxr


def neighborhood_cost(p: CostParams, d: int) -> float:
    """Cost of scanning a full neighborhood of degree d."""
    if d < 0:
        raise DomainError("degree must be non-negative")
    if d == 0:
        return 0.0
    return edge_cost(p) + (d - 1) * (p.t_add + p.t_shf + p.t_and + p.t_bxr)


def degree_cost(p: CostParams) -> float:
    """Cost of one degree query (two offset fetches and a subtraction)."""
    return 2 * p.t_cm + p.t_sub
