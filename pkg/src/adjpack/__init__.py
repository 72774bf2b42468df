"""Space-efficient adjacency-array graphs with direct query support.

The package stores a graph as bit-packed neighbor arrays behind compact
offset structures (pointer arrays or rank/select bit vectors), optionally
after relabeling vertices to shrink the encoding, and runs BFS, PageRank,
connected components, shortest paths and triangle counting directly on
the compressed form.
"""

from .algorithms import bfs, connected_components, pagerank, sssp, \
    triangle_count
from .analysis import er_expected_sizes, lower_bounds, pl_expected_size
from .compressed import CompressedGraph, compress, valid_pairs
from .container import load, save
from .errors import (AdjpackError, CapacityError, CodecError, ConfigError,
                     DomainError, ParseError)
from .graph import AdjacencyGraph, GraphSpec, from_edges, generate, \
    load_edge_list
from .permute import PERMUTER_KINDS, apply, make_permutation
from .transform import ADJACENCY_KINDS, TransformScheme

__version__ = "0.1.0"

__all__ = [
    "AdjacencyGraph", "CompressedGraph", "GraphSpec", "TransformScheme",
    "ADJACENCY_KINDS", "PERMUTER_KINDS",
    "AdjpackError", "CapacityError", "CodecError", "ConfigError",
    "DomainError", "ParseError",
    "apply", "bfs", "compress", "connected_components", "er_expected_sizes",
    "from_edges", "generate", "load", "load_edge_list", "lower_bounds",
    "make_permutation", "pagerank", "pl_expected_size", "save", "sssp",
    "triangle_count", "valid_pairs",
]
