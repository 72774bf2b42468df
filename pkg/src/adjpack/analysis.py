"""Analytic size models and storage lower bounds.

These estimators exist to sanity-check measured sizes and to regenerate the
theory curves: how big an adjacency array must be information-theoretically,
and how big the encoder should expect one to be for uniform random and
power-law graphs. Everything is closed-form; binomials go through log-gamma
so astronomically large arguments stay finite.
"""

from __future__ import annotations

import math

from .errors import DomainError


def log2_binomial(a, b) -> float:
    """log2 of C(a, b) for real a >= b >= 0, via log-gamma."""
    if b < 0 or b > a:
        raise DomainError("binomial needs 0 <= b <= a")
    if b == 0 or b == a:
        return 0.0
    return (math.lgamma(a + 1) - math.lgamma(b + 1)
            - math.lgamma(a - b + 1)) / math.log(2)


def _ceil_log2_real(x: float) -> int:
    """Ceiling of log2 for positive reals (the size formulas use real logs)."""
    if x <= 0:
        raise DomainError("log argument must be positive")
    return math.ceil(math.log2(x))


def lower_bounds(n: int, m: int, max_weight: int = 1, id_bits: int = 64,
                 block_bits: int = 8) -> dict:
    """Storage lower bounds for the parts of an adjacency array.

    Returns real-valued bits plus their ceilings for one vertex ID, one
    offset, one weight, the whole offset bit vector (choosing which of the
    payload blocks start neighborhoods), and the whole graph (which of the
    possible graphs this is). Also reports the plain adjacency-array bytes
    at id_bits per entry, the figure the graph bound is compared against.
    """
    if n < 1 or m < 0:
        raise DomainError("need n >= 1 and m >= 0")
    pairs = n * (n - 1) / 2
    if m > pairs:
        raise DomainError(f"m = {m} exceeds the {int(pairs)} possible edges")
    vertex_id = math.log2(n) if n > 1 else 0.0
    offset = math.log2(2 * m) if m else 0.0
    weight = math.log2(max_weight) if max_weight > 1 else 0.0
    blocks = 2 * id_bits * m / block_bits
    bitvector = log2_binomial(blocks, n) if blocks >= n else 0.0
    graph = log2_binomial(pairs, m)
    out = {
        "vertex_id_bits": vertex_id,
        "offset_bits": offset,
        "weight_bits": weight,
        "bitvector_bits": bitvector,
        "graph_bits": graph,
        "adjacency_array_bytes": 2 * m * id_bits / 8,
        "graph_bytes": graph / 8,
    }
    for key in ("vertex_id", "offset", "weight", "bitvector", "graph"):
        out[key + "_bits_ceil"] = math.ceil(out[key + "_bits"])
    return out


def er_expected_sizes(n: int, p: float, max_weight: int = 0) -> dict:
    """Expected adjacency and offset sizes for a uniform random graph.

    E|A| = (ceil(log n) + ceil(log W)) * p * n^2 and
    E|O| = n * ceil(log 2p + 2 log n). The p*n^2 term counts self pairs,
    so the model runs slightly high on dense graphs; that slack is the
    model's, not the encoder's.
    """
    if not 0 < p <= 1:
        raise DomainError("p must be in (0, 1]")
    if n < 2:
        raise DomainError("n must be >= 2")
    id_bits = _ceil_log2_real(n)
    w_bits = _ceil_log2_real(max_weight) if max_weight > 1 else 0
    ea = (id_bits + w_bits) * p * n * n
    eo = n * math.ceil(math.log2(2 * p) + 2 * math.log2(n))
    return {"ea_bits": ea, "eo_bits": eo,
            "id_bits": id_bits, "weight_bits": w_bits}


def pl_expected_size(n: int, alpha: float, beta: float,
                     max_weight: int = 0) -> dict:
    """Expected adjacency size for a power-law graph with d_v ~ alpha x^-beta.

    The degree cap d_hat solves n * alpha * d^-beta ~ 1/log n; the edge count
    is the integral of alpha x^(1-beta) / 2 up to d_hat, whose antiderivative
    switches to a logarithm at beta = 2.
    """
    if beta <= 1:
        raise DomainError("beta must be > 1")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if n < 2:
        raise DomainError("n must be >= 2")
    d_hat = (alpha * n * math.log2(n) / (beta - 1)) ** (1.0 / (beta - 1))
    if beta == 2:
        m_est = (alpha / 2) * math.log(d_hat)
    else:
        m_est = (alpha / 2) * (d_hat ** (2 - beta) - 1) / (2 - beta)
    id_bits = _ceil_log2_real(n)
    w_bits = _ceil_log2_real(max_weight) if max_weight > 1 else 0
    ea = 2 * m_est * (id_bits + w_bits)
    eo = n * _ceil_log2_real(2 * m_est) if m_est >= 0.5 else n
    return {"d_hat": d_hat, "m": m_est, "ea_bits": ea, "eo_bits": eo,
            "id_bits": id_bits, "weight_bits": w_bits}


def pl_degree_sum(alpha: float, beta: float, d_hat: float) -> float:
    """Direct summation oracle for the power-law edge count."""
    return sum(alpha * x ** (1 - beta) / 2 for x in range(1, int(d_hat) + 1))


def emit_theory_figure_data(ns, p: float | None = None,
                            alpha: float | None = None,
                            beta: float | None = None,
                            max_weight: int = 255) -> str:
    """CSV of model curves vs the 32+8-bit baseline.

    One row per (model, n, scheme): the baseline stores every adjacency
    entry as a 32-bit ID plus an 8-bit weight; the model rows use the
    expected-size estimators above. Schema: model,n,scheme,bits.
    """
    if p is None and (alpha is None or beta is None):
        raise DomainError("need p for the uniform model or alpha and beta "
                          "for the power-law model")
    lines = ["model,n,scheme,bits"]
    for n in ns:
        n = int(n)
        if p is not None:
            est = er_expected_sizes(n, p, max_weight)
            m2 = p * n * n  # 2m in the model's own terms
            lines.append(f"er,{n},baseline,{m2 * 40:.1f}")
            lines.append(f"er,{n},packed,{est['ea_bits']:.1f}")
        if alpha is not None and beta is not None:
            est = pl_expected_size(n, alpha, beta, max_weight)
            lines.append(f"pl,{n},baseline,{2 * est['m'] * 40:.1f}")
            lines.append(f"pl,{n},packed,{est['ea_bits']:.1f}")
    return "\n".join(lines) + "\n"
