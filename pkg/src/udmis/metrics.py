"""Quality and time-to-solution metrics for sampled bitstrings.

``tts_q`` converts a success probability into the number of shots needed to
see an optimum at 99% confidence; ``gap`` is the normalized distance to the
optimum; the truncated average gap discards the worst-cost tail of a sample
set before averaging.
"""

from __future__ import annotations

import math

from .graph import Graph, bitstring_support, default_alpha, is_independent_set, qubo_cost
from .quantum import SampleSet

WEIGHT_TOL = 1e-9
TARGET_CONFIDENCE = 0.99


def p_mis(samples: SampleSet, g: Graph, optimum: float) -> float:
    """Fraction of shots that are independent sets of optimal weight."""
    hit = 0
    for s, c in samples.counts.items():
        verts = bitstring_support(s)
        if not is_independent_set(g, verts):
            continue
        weight = sum(g.weights[v] for v in verts)
        if abs(weight - optimum) <= WEIGHT_TOL:
            hit += c
    return hit / samples.total_shots


def tts_q(p: float) -> float:
    """Shots needed to find an optimum with 99% success probability.

    ``p = 0`` maps to infinity; ``p >= 0.99`` is clamped to one shot.
    """
    if not (0.0 <= p < 1.0):
        raise ValueError(f"success probability must be in [0, 1), got {p}")
    if p == 0.0:
        return math.inf
    if p >= TARGET_CONFIDENCE:
        return 1.0
    return math.log(1.0 - TARGET_CONFIDENCE) / math.log(1.0 - p)


def gap(value: float, optimum: float) -> float:
    """Normalized distance |(value - optimum) / optimum|."""
    if optimum == 0:
        raise ValueError("gap undefined for optimum = 0")
    return abs((value - optimum) / optimum)


def truncated_avg_gap(
    samples: SampleSet, g: Graph, optimum: float, keep_fraction: float
) -> float:
    """Average gap over the best-cost ``keep_fraction`` of the shots.

    Shots are sorted by QUBO cost ascending (ties by bitstring); the kept
    prefix is ceil(keep_fraction * shots).  Gaps are computed from the
    independent-set weight of each kept shot; non-IS shots (possible only on
    raw, unrepaired samples) are filtered out of the average.
    """
    if not (0.0 < keep_fraction <= 1.0):
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    if samples.total_shots < 1:
        raise ValueError("sample set is empty")
    alpha = default_alpha(g)
    ranked = []
    for s, c in samples.items_sorted():
        bits = [int(ch) for ch in s]
        cost = qubo_cost(g, bits, alpha)
        verts = bitstring_support(s)
        valid = is_independent_set(g, verts)
        weight = sum(g.weights[v] for v in verts) if valid else None
        ranked.append((cost, s, c, weight))
    ranked.sort(key=lambda t: (t[0], t[1]))
    keep = math.ceil(keep_fraction * samples.total_shots)
    gaps_sum = 0.0
    gaps_n = 0
    for cost, _s, c, weight in ranked:
        if keep <= 0:
            break
        take = min(c, keep)
        keep -= take
        if weight is None:
            continue
        gaps_sum += take * gap(weight, optimum)
        gaps_n += take
    if gaps_n == 0:
        raise ValueError("no valid independent-set shots among the kept prefix")
    return gaps_sum / gaps_n
