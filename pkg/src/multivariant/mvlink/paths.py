"""Counting bounded call trees of a (multivariant) call graph."""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..wat.callgraph import BACK, DISPATCHER, ORIGINAL, VARIANT, CallGraph


@dataclass(frozen=True)
class PathCount:
    value: int
    budget: int

    def __int__(self) -> int:
        return self.value


def count_paths(graph: CallGraph, budget: int = 1) -> PathCount:
    """Number of distinct bounded call trees rooted at the entry.

    A visit of an ordinary node takes each normal out-edge once; a back edge
    into node h is taken 0..r times, r being h's remaining budget along the
    current root path, and each traversal runs with r - 1. A dispatcher visit
    takes exactly one of its edges. The budget is tracked per back-edge target,
    so every cycle through h shares one counter.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    heads = sorted({callee for _, callee, kind in graph.edges if kind == BACK})
    slot = {h: i for i, h in enumerate(heads)}
    succ: dict[str, list[tuple[str, str]]] = {n: [] for n in graph.nodes}
    for caller, callee, kind in graph.edges:
        succ[caller].append((callee, kind))

    memo: dict[tuple, int] = {}
    active: set[tuple] = set()

    def count(node: str, rem: tuple[int, ...]) -> int:
        key = (node, rem)
        if key in memo:
            return memo[key]
        if key in active:
            raise ValueError(f"cycle through {node} is not closed by a back edge")
        active.add(key)
        if graph.nodes[node] == DISPATCHER and succ[node]:
            total = sum(count(child, rem) for child, _ in succ[node])
        else:
            total = 1
            for child, kind in succ[node]:
                if kind == BACK:
                    i = slot[child]
                    r = rem[i]
                    if r:
                        sub = count(child, rem[:i] + (r - 1,) + rem[i + 1:])
                        total *= sum(sub ** t for t in range(r + 1))
                else:
                    total *= count(child, rem)
        active.discard(key)
        memo[key] = total
        return total

    return PathCount(count(graph.entry, (budget,) * len(heads)), budget)


def path_report(graph: CallGraph, budget: int = 1) -> dict:
    """Summary row: entry, budget, path count and node-type tallies."""
    targets = {name[: -len("__dispatch")] for name, t in graph.nodes.items()
               if t == DISPATCHER and name.endswith("__dispatch")}
    originals = [n for n, t in graph.nodes.items() if t == ORIGINAL]
    return {
        "entry": graph.entry,
        "budget": budget,
        "paths": str(count_paths(graph, budget).value),
        "dispatchers": graph.count(DISPATCHER),
        "variants": graph.count(VARIANT),
        "non_diversified": sum(1 for n in originals if n not in targets),
    }


def path_report_json(graph: CallGraph, budget: int = 1) -> str:
    return json.dumps(path_report(graph, budget), indent=2)
