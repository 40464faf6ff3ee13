"""Static call graphs with typed nodes (original / variant / dispatcher)."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir import Module

ORIGINAL, VARIANT, DISPATCHER = "original", "variant", "dispatcher"
NORMAL, DISPATCH, BACK = "normal", "dispatch", "back"


@dataclass
class CallGraph:
    entry: str
    nodes: dict[str, str] = field(default_factory=dict)  # name -> node type, DFS discovery order
    edges: list[tuple[str, str, str]] = field(default_factory=list)  # (caller, callee, kind)

    def successors(self, name: str) -> list[tuple[str, str]]:
        return [(callee, kind) for caller, callee, kind in self.edges if caller == name]

    def edge_set(self) -> set[tuple[str, str, str]]:
        return set(self.edges)

    def count(self, node_type: str) -> int:
        return sum(1 for t in self.nodes.values() if t == node_type)


def classify(entry: str, node_types: dict[str, str],
             succ: dict[str, list[str]]) -> CallGraph:
    """Build a CallGraph from ordered successor lists.

    Depth-first from ``entry``, children in list order; an edge to a node still
    on the DFS stack is a back edge, except out-edges of dispatchers, which are
    always dispatch edges.
    """
    graph = CallGraph(entry)
    on_stack: set[str] = set()
    graph.nodes[entry] = node_types[entry]
    on_stack.add(entry)
    stack = [(entry, iter(succ.get(entry, ())))]
    while stack:
        name, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            on_stack.discard(name)
            continue
        if node_types[name] == DISPATCHER:
            kind = DISPATCH
        elif child in on_stack:
            kind = BACK
        else:
            kind = NORMAL
        graph.edges.append((name, child, kind))
        if child not in graph.nodes:
            graph.nodes[child] = node_types[child]
            on_stack.add(child)
            stack.append((child, iter(succ.get(child, ()))))
    return graph


def build_call_graph(module: Module, entry: str) -> CallGraph:
    """Call graph of the functions reachable from the export ``entry``."""
    try:
        root = module.resolve_export(entry).name
    except KeyError:
        if not module.has_function(entry):
            raise KeyError(f"entry {entry!r} not found") from None
        root = entry
    node_types = {f.name: f.origin.kind for f in module.functions}
    succ: dict[str, list[str]] = {}
    for f in module.functions:
        seen: list[str] = []
        for callee in f.calls():
            if callee in node_types and callee not in seen:
                seen.append(callee)
        succ[f.name] = seen
    return classify(root, node_types, succ)
