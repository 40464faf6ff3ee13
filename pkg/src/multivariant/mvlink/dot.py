from __future__ import annotations

from ..wat.callgraph import BACK, DISPATCH, DISPATCHER, ORIGINAL, VARIANT, CallGraph

FILL = {ORIGINAL: "yellow", DISPATCHER: "green", VARIANT: "grey"}
_EDGE_STYLE = {DISPATCH: ' [color="darkgreen"]', BACK: ' [style="dashed"]'}


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: CallGraph, name: str = "mcg") -> str:
    """Graphviz rendering; nodes in discovery order, edges in call-site order."""
    lines = [f"digraph {_quote(name)} {{", "  node [style=filled];"]
    for node, ntype in graph.nodes.items():
        lines.append(f"  {_quote(node)} [fillcolor={FILL[ntype]}];")
    for caller, callee, kind in graph.edges:
        lines.append(f"  {_quote(caller)} -> {_quote(callee)}{_EDGE_STYLE.get(kind, '')};")
    lines.append("}")
    return "\n".join(lines) + "\n"
