"""Command line entry points.

Subcommands: ingest, generate, compress, run, bench-offsets, estimate.
Exit codes: 0 success, 2 input problem, 3 configuration problem,
4 internal error. Every command is deterministic for a fixed --seed;
timing lines are the only output that varies between runs.
"""

from __future__ import annotations

import argparse
import gzip
import hashlib
import json
import os
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import algorithms, analysis, container
from .compressed import CompressedGraph, compress, valid_pairs
from .errors import (AdjpackError, CapacityError, CodecError, ConfigError,
                     DomainError, ParseError)
from .graph import AdjacencyGraph, GraphSpec, generate, load_edge_list
from .offsets import BITVECTOR_KINDS, POINTER_KINDS
from .permute import PERMUTER_KINDS, make_permutation
from .transform import ADJACENCY_KINDS

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_INTERNAL = 4

THREADS_ENV = "ADJPACK_THREADS"

ALGORITHMS = ("bfs", "pr", "cc", "sssp", "tc")


def _open_text(path: str):
    if path.endswith(".gz"):
        return gzip.open(path, "rt")
    return open(path, "r")


def _resolve_threads(args) -> int:
    if getattr(args, "sequential", False):
        return 1
    if getattr(args, "threads", None):
        return args.threads
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _load_container(path: str):
    try:
        return container.load(path)
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None


def _require_plain(obj, path: str) -> AdjacencyGraph:
    if not isinstance(obj, AdjacencyGraph):
        raise ParseError(f"{path} holds a compressed graph; "
                         "this command needs an ingested one")
    return obj


def compatibility_matrix() -> str:
    """Render the offset x adjacency pairing table as text."""
    pairs = set(valid_pairs(weighted=False))
    o_kinds = POINTER_KINDS + BITVECTOR_KINDS
    head = "offset\\adjacency"
    widths = [max(len(head), 8)] + [max(len(a), 3) for a in ADJACENCY_KINDS]
    lines = ["  ".join(s.ljust(w) for s, w in
                       zip((head,) + ADJACENCY_KINDS, widths))]
    for o in o_kinds:
        row = [o] + ["ok" if (o, a) in pairs else "--"
                     for a in ADJACENCY_KINDS]
        lines.append("  ".join(s.ljust(w) for s, w in zip(row, widths)))
    lines.append("weighted graphs additionally need a fixed-width kind "
                 "(global, local, global-gap, local-gap)")
    return "\n".join(lines)


# --- ingest ---

def cmd_ingest(args) -> int:
    if args.format != "edge-list":
        raise ConfigError(f"unknown input format {args.format!r}")
    with _open_text(args.input) as fh:
        g = load_edge_list(fh, weighted=args.weighted)
    container.save(args.output, g)
    print(f"ingested {args.input}: n={g.n} m={g.m} "
          f"weighted={'yes' if g.weighted else 'no'} -> {args.output}")
    return EXIT_OK


# --- generate ---

def cmd_generate(args) -> int:
    spec = GraphSpec(kind=args.kind, n=args.n, p=args.p, scale=args.scale,
                     edge_factor=args.edge_factor, seed=args.seed,
                     weighted=args.weighted, max_weight=args.max_weight)
    g = generate(spec)
    container.save(args.output, g)
    print(f"generated {args.kind}: n={g.n} m={g.m} "
          f"weighted={'yes' if g.weighted else 'no'} -> {args.output}")
    return EXIT_OK


# --- compress ---

def _size_csv(report: dict) -> str:
    rows = [
        ("config", report["config"]),
        ("n", report["n"]),
        ("m", report["m"]),
        ("payload_bits", report["payload_bits"]),
        ("offset_bits", report["offset_bits"]),
        ("header_bits", report["header_bits"]),
        ("side_bits", report["side_bits"]),
        ("aux_bits", report["aux_bits"]),
        ("total_bits", report["total_bits"]),
        ("total_bytes", (report["total_bits"] + 7) // 8),
        ("bits_per_edge", f"{report['bits_per_edge']:.4f}"),
    ]
    return "field,value\n" + "\n".join(f"{k},{v}" for k, v in rows) + "\n"


def cmd_compress(args) -> int:
    g = _require_plain(_load_container(args.input), args.input)
    if args.adjacency == "brb" and args.brb_depth is None:
        raise ConfigError("--adjacency brb needs an explicit --brb-depth")
    if args.permuter not in PERMUTER_KINDS:
        raise ConfigError(f"unknown permuter {args.permuter!r}; valid kinds "
                          f"are {', '.join(PERMUTER_KINDS)}")
    block_bits = args.block_bits
    if block_bits not in (None, "entry"):
        block_bits = int(block_bits)
    brb_depth = args.brb_depth if args.brb_depth is not None else 4

    t0 = time.perf_counter()
    order = make_permutation(g, args.permuter, seed=args.seed,
                             imbalance=args.imbalance, brb_depth=brb_depth)
    t1 = time.perf_counter()
    cg = compress(g, o_kind=args.offsets, a_kind=args.adjacency,
                  permuter=args.permuter, weight_mode=args.weight_mode,
                  block_bits=block_bits, seed=args.seed,
                  imbalance=args.imbalance, brb_depth=brb_depth,
                  precomputed_order=order)
    t2 = time.perf_counter()

    csv = _size_csv(cg.size_report())
    container.save(args.output, cg, size_csv=csv)
    sys.stdout.write(csv)
    print(f"permute_seconds,{t1 - t0:.6f}")
    print(f"encode_seconds,{t2 - t1:.6f}")
    print(f"wrote {args.output}")
    return EXIT_OK


# --- run ---

def _digest(arr: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()


def _to_original_order(cg, values: np.ndarray) -> np.ndarray:
    """Reindex per-vertex results from relabeled space to input ids."""
    if isinstance(cg, CompressedGraph) and cg.permutation is not None:
        return values[cg.permutation.forward]
    return values


def cmd_run(args) -> int:
    obj = _load_container(args.input)
    threads = _resolve_threads(args)
    n = obj.n
    perm = obj.permutation if isinstance(obj, CompressedGraph) else None
    out = {"alg": args.alg, "n": n, "m": obj.m, "threads": threads}

    def map_source(s: int) -> int:
        if not 0 <= s < max(n, 1):
            raise DomainError(f"--source {s} out of range [0, {n})")
        return int(perm.forward[s]) if perm is not None else s

    t0 = time.perf_counter()
    if args.alg == "bfs":
        parents, dist = algorithms.bfs(obj, map_source(args.source))
        dist = _to_original_order(obj, dist).astype("<i8")
        out["source"] = args.source
        out["reached"] = int((dist >= 0).sum())
        out["digest"] = _digest(dist)
    elif args.alg == "pr":
        pr = algorithms.pagerank(obj, damping=args.damping, tol=args.tol,
                                 max_iters=args.max_iters)
        pr = _to_original_order(obj, pr).astype("<f8")
        out["rank_l1"] = f"{float(np.abs(pr).sum()):.12e}"
        out["digest"] = _digest(pr)
    elif args.alg == "cc":
        labels = algorithms.connected_components(obj)
        if perm is not None:
            # labels are representative ids in relabeled space; translate
            # the representatives too so the digest names input vertices
            inv = perm.inverse()
            labels = inv[labels[perm.forward]]
            comp_min = np.full(n, n, dtype=np.int64)
            np.minimum.at(comp_min, labels, np.arange(n, dtype=np.int64))
            labels = comp_min[labels]
        labels = labels.astype("<i8")
        out["components"] = int(len(np.unique(labels))) if n else 0
        out["digest"] = _digest(labels)
    elif args.alg == "sssp":
        if not obj.weighted:
            raise ConfigError("sssp needs a weighted graph; this container "
                              "is unweighted")
        dist = algorithms.sssp(obj, map_source(args.source),
                               delta=args.delta)
        dist = _to_original_order(obj, dist).astype("<i8")
        out["source"] = args.source
        out["reached"] = int((dist >= 0).sum())
        out["digest"] = _digest(dist)
    elif args.alg == "tc":
        tri = algorithms.triangle_count(obj)
        out["triangles"] = int(tri)
        out["digest"] = hashlib.sha256(str(int(tri)).encode()).hexdigest()
    else:
        raise ConfigError(f"unknown algorithm {args.alg!r}")
    out["wall_seconds"] = round(time.perf_counter() - t0, 6)
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


# --- bench-offsets ---

def _bench_worker(cg, vertices: np.ndarray) -> list[int]:
    lat = []
    q = cg.offset_of
    clock = time.perf_counter_ns
    for v in vertices:
        t0 = clock()
        q(int(v))
        lat.append(clock() - t0)
    return lat


def cmd_bench_offsets(args) -> int:
    obj = _load_container(args.input)
    if not isinstance(obj, CompressedGraph):
        raise ParseError(f"{args.input} is not a compressed container")
    if obj.n == 0:
        raise DomainError("cannot benchmark an empty graph")
    sweep = [args.threads] if args.threads else [1, 2, 4, 8]
    structure = obj.o_kind
    print("structure,threads,queries_per_worker,mean_us,median_us")
    for t in sweep:
        rngs = [np.random.Generator(np.random.PCG64(args.seed + i))
                for i in range(t)]
        batches = [r.integers(0, obj.n, size=args.queries) for r in rngs]
        if t == 1:
            lats = _bench_worker(obj, batches[0])
        else:
            with ThreadPoolExecutor(max_workers=t) as pool:
                results = pool.map(lambda b: _bench_worker(obj, b), batches)
                lats = [x for part in results for x in part]
        mean_us = statistics.fmean(lats) / 1000.0
        median_us = statistics.median(lats) / 1000.0
        print(f"{structure},{t},{args.queries},{mean_us:.3f},{median_us:.3f}")
    return EXIT_OK


# --- estimate ---

def _print_kv_csv(d: dict):
    print("field,value")
    for k in sorted(d):
        v = d[k]
        print(f"{k},{v:.6e}" if isinstance(v, float) else f"{k},{v}")


def cmd_estimate(args) -> int:
    if args.model == "bounds":
        if args.n is None or args.m is None:
            raise ConfigError("--model bounds needs --n and --m")
        _print_kv_csv(analysis.lower_bounds(args.n, args.m,
                                            max_weight=args.max_weight or 1,
                                            id_bits=args.id_bits,
                                            block_bits=args.block_bits))
        return EXIT_OK
    if args.model == "er":
        if args.n is None or args.p is None:
            raise ConfigError("--model er needs --n and --p")
        if args.ns:
            ns = [int(x) for x in args.ns.split(",")]
            sys.stdout.write(analysis.emit_theory_figure_data(
                ns, p=args.p, max_weight=args.max_weight))
            return EXIT_OK
        _print_kv_csv(analysis.er_expected_sizes(args.n, args.p,
                                                 max_weight=args.max_weight))
        return EXIT_OK
    if args.model == "pl":
        if args.ns:
            ns = [int(x) for x in args.ns.split(",")]
            sys.stdout.write(analysis.emit_theory_figure_data(
                ns, alpha=args.alpha, beta=args.beta,
                max_weight=args.max_weight))
            return EXIT_OK
        if args.n is None:
            raise ConfigError("--model pl needs --n")
        _print_kv_csv(analysis.pl_expected_size(args.n, args.alpha,
                                                args.beta,
                                                max_weight=args.max_weight))
        return EXIT_OK
    raise ConfigError(f"unknown model {args.model!r}")


# --- parser ---

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="adjpack",
        description="compress adjacency-array graphs and query or run "
                    "algorithms on the compressed form")
    sub = p.add_subparsers(dest="command", required=True)

    pi = sub.add_parser("ingest", help="parse an edge list into a container")
    pi.add_argument("input", help="edge list path (.gz is read transparently)")
    pi.add_argument("-o", "--output", required=True)
    pi.add_argument("--format", default="edge-list",
                    choices=["edge-list"])
    pi.add_argument("--weighted", action="store_true",
                    help="require and keep a third weight column")
    pi.set_defaults(func=cmd_ingest)

    pg = sub.add_parser("generate", help="write a synthetic graph container")
    pg.add_argument("--kind", required=True, choices=["er", "kronecker"])
    pg.add_argument("--n", type=int, default=0, help="er vertex count")
    pg.add_argument("--p", type=float, default=0.0, help="er edge probability")
    pg.add_argument("--scale", type=int, default=0,
                    help="kronecker scale, n = 2**scale")
    pg.add_argument("--edge-factor", type=int, default=16)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--weighted", action="store_true")
    pg.add_argument("--max-weight", type=int, default=255)
    pg.add_argument("-o", "--output", required=True)
    pg.set_defaults(func=cmd_generate)

    pc = sub.add_parser("compress", help="encode a container")
    pc.add_argument("input")
    pc.add_argument("-o", "--output", required=True)
    pc.add_argument("--offsets", default="ptrlogn",
                    choices=list(POINTER_KINDS + BITVECTOR_KINDS))
    pc.add_argument("--adjacency", default="global",
                    choices=list(ADJACENCY_KINDS))
    pc.add_argument("--permuter", default="identity")
    pc.add_argument("--weight-mode", default=None,
                    choices=["none", "global_width", "local_width"])
    pc.add_argument("--brb-depth", type=int, default=None)
    pc.add_argument("--imbalance", type=float, default=0.0,
                    help="allowed bisection imbalance fraction")
    pc.add_argument("--block-bits", default=None,
                    help="offset bit vector block size: entry, 8, or 64")
    pc.add_argument("--seed", type=int, default=0)
    pc.set_defaults(func=cmd_compress)

    pr = sub.add_parser("run", help="run an algorithm on a container")
    pr.add_argument("input")
    pr.add_argument("--alg", required=True, choices=list(ALGORITHMS))
    pr.add_argument("--source", type=int, default=0,
                    help="bfs/sssp start vertex (input id space)")
    pr.add_argument("--delta", type=int, default=None,
                    help="sssp bucket width, defaults to max weight")
    pr.add_argument("--damping", type=float, default=algorithms.PR_DAMPING)
    pr.add_argument("--tol", type=float, default=algorithms.PR_TOL)
    pr.add_argument("--max-iters", type=int, default=algorithms.PR_MAX_ITERS)
    pr.add_argument("--threads", type=int, default=None,
                    help=f"worker count, overrides ${THREADS_ENV}")
    pr.add_argument("--sequential", action="store_true",
                    help="force single threaded execution")
    pr.set_defaults(func=cmd_run)

    pb = sub.add_parser("bench-offsets",
                        help="time offset_of queries on a compressed "
                             "container")
    pb.add_argument("input")
    pb.add_argument("--queries", type=int, default=1000,
                    help="queries per worker")
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--threads", type=int, default=None,
                    help="bench a single thread count instead of the "
                         "1,2,4,8 sweep")
    pb.set_defaults(func=cmd_bench_offsets)

    pe = sub.add_parser("estimate",
                        help="closed form size models and lower bounds")
    pe.add_argument("--model", required=True, choices=["er", "pl", "bounds"])
    pe.add_argument("--n", type=int, default=None)
    pe.add_argument("--m", type=int, default=None)
    pe.add_argument("--p", type=float, default=None)
    pe.add_argument("--alpha", type=float, default=1.0)
    pe.add_argument("--beta", type=float, default=2.2)
    pe.add_argument("--max-weight", type=int, default=0)
    pe.add_argument("--id-bits", type=int, default=64)
    pe.add_argument("--block-bits", type=int, default=8)
    pe.add_argument("--ns", default=None,
                    help="comma separated n values; emits figure CSV "
                         "(model,n,scheme,bits) instead of a single estimate")
    pe.set_defaults(func=cmd_estimate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, CodecError) as exc:
        print(f"adjpack: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, CapacityError) as exc:
        print(f"adjpack: configuration error: {exc}", file=sys.stderr)
        if args.command == "compress":
            print(compatibility_matrix(), file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"adjpack: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"adjpack: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AdjpackError as exc:
        print(f"adjpack: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - safety net
        print(f"adjpack: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
