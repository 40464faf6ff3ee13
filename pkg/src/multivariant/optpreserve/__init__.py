"""Backend-emulating optimizer and variant/path preservation metrics."""

from ..wat.printer import canonical_hash
from .optimizer import PASS_ORDER, PASSES, PassSet, optimize, optimize_body, optimize_function
from .report import (FunctionPreservation, PreservationReport, group_choices, merged_graph,
                     preservation_report)

__all__ = [
    "canonical_hash", "PASS_ORDER", "PASSES", "PassSet", "optimize", "optimize_body",
    "optimize_function", "FunctionPreservation", "PreservationReport", "group_choices",
    "merged_graph", "preservation_report",
]
