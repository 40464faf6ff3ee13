"""WAT-subset representation: parsing, printing, validation, call graphs."""

from .callgraph import BACK, DISPATCH, DISPATCHER, NORMAL, ORIGINAL, VARIANT, CallGraph, build_call_graph
from .ir import (I32, MASK32, PAGE_SIZE, Function, FuncType, Import, Instr, Module, Origin, const,
                 s32, u32)
from .parser import ParseError, parse_module
from .printer import canonical_hash, canonical_text, print_function, print_module
from .validate import ValidationError, Violation, check, validate

__all__ = [
    "BACK", "DISPATCH", "DISPATCHER", "NORMAL", "ORIGINAL", "VARIANT", "CallGraph",
    "build_call_graph", "I32", "MASK32", "PAGE_SIZE", "Function", "FuncType", "Import",
    "Instr", "Module", "Origin", "const", "s32", "u32", "ParseError", "parse_module",
    "canonical_hash", "canonical_text", "print_function", "print_module",
    "ValidationError", "Violation", "check", "validate",
]
