"""Operand-stack type checking for the WAT subset."""

from __future__ import annotations

from dataclasses import dataclass

from .ir import BLOCK_OPS, I32, MEMORY_OPS, SIMPLE_OPS, Function, Module
from .template import dispatcher_body, dispatcher_choices


@dataclass(frozen=True)
class Violation:
    function: str
    offset: int
    rule: str

    def __str__(self) -> str:
        where = f"{self.function}@{self.offset}" if self.function else "module"
        return f"{where}: {self.rule}"


class ValidationError(ValueError):
    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


@dataclass
class _Frame:
    kind: str
    arity: int
    height: int
    unreachable: bool = False
    has_else: bool = False

    @property
    def label_arity(self) -> int:
        return 0 if self.kind == "loop" else self.arity


def _check_function(module: Module, func: Function) -> list[Violation]:
    out: list[Violation] = []

    def bad(offset: int, rule: str) -> None:
        out.append(Violation(func.name, offset, rule))

    for p in func.type.params:
        if p != I32:
            bad(-1, f"unsupported parameter type {p}")
    frames = [_Frame("func", 1 if func.type.result else 0, 0)]
    height = 0

    def pop(n: int, offset: int) -> bool:
        nonlocal height
        fr = frames[-1]
        if height - n < fr.height:
            if not fr.unreachable:
                bad(offset, "stack underflow")
                height = fr.height
                return False
            height = fr.height
            return True
        height -= n
        return True

    def set_unreachable() -> None:
        nonlocal height
        frames[-1].unreachable = True
        height = frames[-1].height

    for k, ins in enumerate(func.body):
        op = ins.op
        if op in SIMPLE_OPS:
            pops, pushes = SIMPLE_OPS[op]
            if op.startswith("local.") and not (0 <= ins.arg < func.num_locals):
                bad(k, f"local index {ins.arg} out of range")
            if op in MEMORY_OPS:
                if module.memory is None:
                    bad(k, "no memory")
                if not isinstance(ins.arg, int) or ins.arg < 0:
                    bad(k, "negative memory offset")
            pop(pops, k)
            height += pushes
        elif op == "call":
            ftype = module.callee_type(ins.arg)
            if ftype is None:
                bad(k, f"unknown call target {ins.arg}")
                continue
            pop(ftype.arity, k)
            height += 1 if ftype.result else 0
        elif op in BLOCK_OPS:
            if op == "if":
                pop(1, k)
            frames.append(_Frame(op, 1 if ins.arg else 0, height))
        elif op == "else":
            fr = frames[-1]
            if fr.kind != "if" or fr.has_else:
                bad(k, "else without matching if")
                continue
            if height != fr.height + fr.arity and not (fr.unreachable and height <= fr.height + fr.arity):
                bad(k, "type mismatch at else")
            fr.has_else = True
            fr.unreachable = False
            height = fr.height
        elif op == "end":
            if len(frames) == 1:
                bad(k, "unbalanced end")
                continue
            fr = frames.pop()
            if height != fr.height + fr.arity and not (fr.unreachable and height <= fr.height + fr.arity):
                bad(k, "type mismatch at end of block")
            if fr.kind == "if" and fr.arity and not fr.has_else:
                bad(k, "if with a result requires else")
            height = fr.height + fr.arity
        elif op in ("br", "br_if"):
            depth = ins.arg
            if not isinstance(depth, int) or not 0 <= depth < len(frames):
                bad(k, f"branch depth {depth} out of range")
                if op == "br":
                    set_unreachable()
                else:
                    pop(1, k)
                continue
            target = frames[-1 - depth]
            arity = target.label_arity if target.kind != "func" else target.arity
            if op == "br_if":
                pop(1, k)
                pop(arity, k)
                height += arity
            else:
                pop(arity, k)
                set_unreachable()
        elif op == "return":
            pop(frames[0].arity, k)
            set_unreachable()
        else:
            bad(k, f"unknown opcode {op}")
    if len(frames) != 1:
        bad(len(func.body), "missing end")
    else:
        fr = frames[0]
        if height != fr.arity and not (fr.unreachable and height <= fr.arity):
            bad(len(func.body), "type mismatch at function end")

    if func.origin.kind == "dispatcher" and not out:
        out.extend(_check_dispatcher(module, func))
    return out


def _check_dispatcher(module: Module, func: Function) -> list[Violation]:
    rng = [imp.name for imp in module.imports if imp.is_rng]
    body = func.body
    if not rng or not body or body[0].op != "call" or body[0].arg not in rng:
        return [Violation(func.name, 0, "dispatcher must start with the rng import call")]
    choices = dispatcher_choices(body)
    nlocals, expected = dispatcher_body(func.type, choices, body[0].arg)
    if len(choices) < 2 or tuple(expected) != body or nlocals != func.locals:
        return [Violation(func.name, 0, "dispatcher body does not match template")]
    for c in choices:
        if module.callee_type(c) != func.type:
            return [Violation(func.name, 0, f"dispatcher choice {c} has a different signature")]
    return []


def validate(module: Module) -> list[Violation]:
    """Return the list of violations; an empty list means the module is valid."""
    out: list[Violation] = []
    names: set[str] = set()
    for imp in module.imports:
        if imp.name in names:
            out.append(Violation("", -1, f"duplicate function name {imp.name}"))
        names.add(imp.name)
        if any(p != I32 for p in imp.type.params) or imp.type.result not in (None, I32):
            out.append(Violation("", -1, f"import {imp.name} uses unsupported types"))
    for func in module.functions:
        if func.name in names:
            out.append(Violation(func.name, -1, f"duplicate function name {func.name}"))
        names.add(func.name)
    seen: set[str] = set()
    for ename, idx in module.exports:
        if ename in seen:
            out.append(Violation("", -1, f"duplicate export {ename}"))
        seen.add(ename)
        if not 0 <= idx < len(module.functions):
            out.append(Violation("", -1, f"export {ename} index {idx} out of range"))
    if module.memory is not None and module.memory < 0:
        out.append(Violation("", -1, "negative memory size"))
    for func in module.functions:
        out.extend(_check_function(module, func))
    return out


def check(module: Module) -> Module:
    """Raise ValidationError unless the module is valid; return it otherwise."""
    violations = validate(module)
    if violations:
        raise ValidationError(violations)
    return module
