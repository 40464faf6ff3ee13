"""Canonical text output and body hashing."""

from __future__ import annotations

import hashlib

from .ir import BLOCK_OPS, Function, Instr, Module


def _origin_annotation(func: Function) -> str:
    o = func.origin
    if o.kind == "variant":
        args = " ".join(f'"{s}"' for s in (o.of, *o.rules))
        return f" (@origin variant {args})"
    if o.kind == "dispatcher":
        return f' (@origin dispatcher "{o.of}")'
    return ""


def _body_lines(body, indent: str) -> list[str]:
    lines = []
    depth = 0
    for ins in body:
        if ins.op in ("end", "else"):
            depth -= 1
        lines.append(f"{indent}{'  ' * depth}{ins}")
        if ins.op in BLOCK_OPS or ins.op == "else":
            depth += 1
    return lines


def print_function(func: Function, indent: str = "  ") -> str:
    header = f"(func ${func.name}{_origin_annotation(func)}"
    sig = str(func.type)
    if sig:
        header += " " + sig
    if func.locals:
        header += f" (local{' i32' * func.locals})"
    lines = _body_lines(func.body, indent + "  ")
    if not lines:
        return f"{indent}{header})"
    return "\n".join([f"{indent}{header}"] + lines) + ")"


def print_module(module: Module) -> str:
    parts: list[str] = []
    if module.memory is not None:
        parts.append(f"  (memory {module.memory})")
    for imp in module.imports:
        sig = str(imp.type)
        parts.append(f'  (import "{imp.module}" "{imp.field}" (func ${imp.name}{" " + sig if sig else ""}))')
    for func in module.functions:
        parts.append(print_function(func))
    for ename, idx in module.exports:
        parts.append(f'  (export "{ename}" (func ${module.functions[idx].name}))')
    if not parts:
        return "(module)"
    return "(module\n" + "\n".join(parts) + ")\n"


def renumber_locals(func: Function) -> tuple[int, list[Instr]]:
    """Renumber declared (non-parameter) locals by first use; unused ones vanish."""
    nparams = func.type.arity
    mapping: dict[int, int] = {}
    body = []
    for ins in func.body:
        if ins.op.startswith("local.") and ins.arg >= nparams:
            new = mapping.setdefault(ins.arg, nparams + len(mapping))
            ins = Instr(ins.op, new)
        body.append(ins)
    return len(mapping), body


def canonical_text(func: Function) -> str:
    nlocals, body = renumber_locals(func)
    head = f"{func.type}|locals={nlocals}"
    return "\n".join([head] + [str(i) for i in body])


def canonical_hash(func: Function) -> str:
    """SHA-256 of the function body in canonical form; the function name and
    provenance do not participate."""
    return hashlib.sha256(canonical_text(func).encode("utf-8")).hexdigest()
