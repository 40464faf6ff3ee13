"""Variant and path preservation across the optimizer."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from ..mvlink.dispatcher import dispatcher_name
from ..mvlink.paths import count_paths
from ..wat.callgraph import DISPATCH, CallGraph, classify
from ..wat.printer import canonical_hash
from .optimizer import PassSet, optimize_function


@dataclass(frozen=True)
class FunctionPreservation:
    function: str
    variants_before: int
    unique_after: int
    groups: tuple[tuple[str, ...], ...]  # members sharing one optimized body; first is kept


@dataclass
class PreservationReport:
    pv: float
    pp: float
    paths_before: int
    paths_after: int
    per_function: list[FunctionPreservation] = field(default_factory=list)
    passes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "pv": self.pv,
            "pp": self.pp,
            "paths_before": str(self.paths_before),
            "paths_after": str(self.paths_after),
            "passes": list(self.passes),
            "per_function": [
                {"function": f.function, "variants_before": f.variants_before,
                 "unique_after": f.unique_after, "groups": [list(g) for g in f.groups]}
                for f in self.per_function
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def group_choices(vs, passes: PassSet) -> tuple[tuple[str, ...], ...]:
    """Partition variants plus the original by the hash of their optimized body.

    Members are listed in dispatcher choice order (variants, then original).
    """
    groups: dict[str, list[str]] = {}
    for func in list(vs.variants) + [vs.original]:
        groups.setdefault(canonical_hash(optimize_function(func, passes)), []).append(func.name)
    return tuple(tuple(g) for g in groups.values())


def merged_graph(graph: CallGraph, kept: dict[str, set[str]]) -> CallGraph:
    """Drop the dispatch edges to choices that collapsed into another choice."""
    succ: dict[str, list[str]] = {n: [] for n in graph.nodes}
    for caller, callee, kind in graph.edges:
        if kind == DISPATCH and caller in kept and callee not in kept[caller]:
            continue
        succ[caller].append(callee)
    return classify(graph.entry, dict(graph.nodes), succ)


def preservation_report(sets, passes: PassSet, graph: CallGraph, budget: int = 1) -> PreservationReport:
    per_function = []
    kept: dict[str, set[str]] = {}
    for name, vs in sets.items():
        if not vs.variants:
            continue
        groups = group_choices(vs, passes)
        per_function.append(FunctionPreservation(name, len(vs.variants), len(groups), groups))
        kept[dispatcher_name(name)] = {g[0] for g in groups}
    before = count_paths(graph, budget).value
    after = count_paths(merged_graph(graph, kept), budget).value
    total = sum(f.variants_before + 1 for f in per_function)
    pv = Fraction(sum(f.unique_after for f in per_function), total) if total else Fraction(1)
    return PreservationReport(float(pv), float(Fraction(after, before)), before, after,
                              per_function, tuple(passes))
