"""Trace-diversity metrics and the rank-sum test used for timing."""

from __future__ import annotations

import json
import math
from collections import Counter
from typing import Sequence


def uniqueness_ratio(hashes: Sequence[str]) -> float:
    """Distinct hashes over total hashes for one node."""
    if not hashes:
        raise ValueError("uniqueness ratio of an empty hash list")
    return len(set(hashes)) / len(hashes)


def normalized_entropy(hashes: Sequence[str]) -> float:
    """Shannon entropy (natural log) of the pooled hashes over log of their count."""
    n = len(hashes)
    if n < 2:
        raise ValueError("entropy needs at least two samples")
    h = -sum(c / n * math.log(c / n) for c in Counter(hashes).values())
    return min(1.0, max(0.0, h / math.log(n)))


def fleet_metrics(corpus) -> dict:
    per_node = corpus.per_node()
    pooled = corpus.pooled()
    return {
        "per_node_R": [uniqueness_ratio(h) if h else 0.0 for h in per_node],
        "entropy": normalized_entropy(pooled) if len(pooled) >= 2 else 0.0,
        "N": corpus.config.nodes,
        "Q": corpus.config.queries,
        "failures": corpus.failures,
    }


def metrics_json(corpus) -> str:
    return json.dumps(fleet_metrics(corpus), indent=2)


def _midranks(values: Sequence[float]) -> tuple[list[float], list[int]]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    ties = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """U statistic of ``a`` and the two-sided p-value.

    Normal approximation with tie-corrected variance and a 0.5 continuity
    correction. If every value is the same, p is 1.
    """
    n1, n2 = len(a), len(b)
    if not n1 or not n2:
        raise ValueError("both samples must be non-empty")
    ranks, ties = _midranks(list(a) + list(b))
    u = sum(ranks[:n1]) - n1 * (n1 + 1) / 2
    n = n1 + n2
    tie_term = sum(t ** 3 - t for t in ties)
    var = n1 * n2 / 12 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return u, 1.0
    mu = n1 * n2 / 2
    z = max(0.0, abs(u - mu) - 0.5) / math.sqrt(var)
    return u, min(1.0, math.erfc(z / math.sqrt(2)))
