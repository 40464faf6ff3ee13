"""Peephole passes standing in for a backend's pre-codegen cleanups.

Every pass rewrites straight-line windows of constants and arithmetic only,
so no window can contain a branch target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from ..diversify.rules import fold_window
from ..wat.ir import Function, Instr, Module, const, u32

Body = tuple[Instr, ...]


def _is(ins: Instr, op: str, arg=None) -> bool:
    return ins.op == op and (arg is None or ins.arg == arg)


def _rewrite(body: Body, step: Callable[[Body, int], tuple[int, list[Instr]] | None]) -> Body:
    """One left-to-right sweep; ``step`` returns (consumed, replacement) or None."""
    out: list[Instr] = []
    i = 0
    while i < len(body):
        hit = step(body, i)
        if hit is None:
            out.append(body[i])
            i += 1
        else:
            consumed, repl = hit
            out.extend(repl)
            i += consumed
    return tuple(out)


def _sub_to_add(body, i):
    if i + 1 < len(body) and _is(body[i], "i32.const") and _is(body[i + 1], "i32.sub"):
        return 2, [const(-body[i].arg), Instr("i32.add")]
    return None


def _fold(body, i):
    for width in (3, 2):
        if i + width <= len(body):
            folded = fold_window(body[i:i + width])
            if folded is not None:
                return width, [folded]
    return None


def _merger(op: str, combine):
    def step(body, i):
        if i + 3 < len(body):
            a, o1, b, o2 = body[i:i + 4]
            if _is(a, "i32.const") and _is(o1, op) and _is(b, "i32.const") and _is(o2, op):
                return 4, [const(combine(a.arg, b.arg)), Instr(op)]
        return None
    return step


def _identity_elim(body, i):
    if i + 1 < len(body) and _is(body[i], "i32.const"):
        c, op = body[i].arg, body[i + 1].op
        if (c == 0 and op in ("i32.add", "i32.sub")) or (c == 1 and op == "i32.mul"):
            return 2, []
    return None


def _nop_elim(body, i):
    return (1, []) if _is(body[i], "nop") else None


PASSES: dict[str, Callable] = {
    "SUB_TO_ADD_CANON": _sub_to_add,
    "CONST_FOLD": _fold,
    "CONST_ADD_MERGE": _merger("i32.add", lambda a, b: u32(a + b)),
    "CONST_MUL_MERGE": _merger("i32.mul", lambda a, b: u32(a * b)),
    "ADD0_MUL1_ELIM": _identity_elim,
    "NOP_ELIM": _nop_elim,
}
PASS_ORDER = tuple(PASSES)


@dataclass(frozen=True)
class PassSet:
    passes: tuple[str, ...] = PASS_ORDER

    def __post_init__(self) -> None:
        object.__setattr__(self, "passes", tuple(self.passes))
        unknown = [p for p in self.passes if p not in PASSES]
        if unknown:
            raise ValueError(f"unknown passes: {', '.join(unknown)}")

    @classmethod
    def parse(cls, text: str) -> "PassSet":
        """Comma-separated ids; "all" for every pass, "" or "none" for no pass."""
        text = text.strip()
        if text.lower() == "all":
            return cls()
        if text.lower() in ("", "none"):
            return cls(())
        return cls(tuple(p.strip() for p in text.split(",") if p.strip()))

    def __iter__(self):
        return iter(self.passes)

    def __len__(self) -> int:
        return len(self.passes)


def optimize_body(body: Iterable[Instr], passes: PassSet) -> Body:
    """Run each pass to fixpoint in order, and repeat the sequence until stable."""
    body = tuple(body)
    while True:
        before = body
        for pid in passes:
            step = PASSES[pid]
            while True:
                new = _rewrite(body, step)
                if new == body:
                    break
                body = new
        if body == before:
            return body


def optimize_function(func: Function, passes: PassSet) -> Function:
    body = optimize_body(func.body, passes)
    return func if body == func.body else func.with_body(body)


def optimize(module: Module, passes: PassSet | None = None) -> Module:
    passes = PassSet() if passes is None else passes
    return module.replace_functions(tuple(optimize_function(f, passes) for f in module.functions))
