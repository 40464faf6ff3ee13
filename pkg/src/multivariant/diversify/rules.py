"""Semantics-preserving rewrite rules over instruction windows.

Each rule looks at the window starting at one body position and returns the
rewritten bodies it can produce there (usually zero or one).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..interp.reference import block_tables
from ..interp.semantics import BINARY
from ..interp.traps import Trap
from ..rng import SplitMix64
from ..wat.ir import BINOPS, BLOCK_OPS, Instr, const
from .arith import split_add_const, split_mul_const

Body = tuple[Instr, ...]


def _is(ins: Instr, op: str, arg=None) -> bool:
    return ins.op == op and (arg is None or ins.arg == arg)


def const_add_split(body: Body, pos: int, rng: SplitMix64) -> list[Body]:
    """``const c; add`` becomes a chain of adds; a bare ``const c`` becomes a sum."""
    if not _is(body[pos], "i32.const"):
        return []
    parts = split_add_const(body[pos].arg, rng.randint(2, 4), rng)
    window: list[Instr] = []
    if pos + 1 < len(body) and _is(body[pos + 1], "i32.add"):
        for p in parts:
            window += [const(p), Instr("i32.add")]
        return [body[:pos] + tuple(window) + body[pos + 2:]]
    window.append(const(parts[0]))
    for p in parts[1:]:
        window += [const(p), Instr("i32.add")]
    return [body[:pos] + tuple(window) + body[pos + 1:]]


def add_sub_invert(body: Body, pos: int, rng: SplitMix64) -> list[Body]:
    if pos + 1 >= len(body) or not _is(body[pos], "i32.const"):
        return []
    flip = {"i32.add": "i32.sub", "i32.sub": "i32.add"}.get(body[pos + 1].op)
    if flip is None:
        return []
    return [body[:pos] + (const(-body[pos].arg), Instr(flip)) + body[pos + 2:]]


def mul_factor_split(body: Body, pos: int, rng: SplitMix64) -> list[Body]:
    if pos + 1 >= len(body) or not (_is(body[pos], "i32.const") and _is(body[pos + 1], "i32.mul")):
        return []
    a, b = split_mul_const(body[pos].arg, rng)
    window = (const(b), Instr("i32.mul"), const(a), Instr("i32.mul"))
    return [body[:pos] + window + body[pos + 2:]]


def mul2_to_add(body: Body, pos: int, rng: SplitMix64) -> list[Body]:
    if pos + 2 >= len(body):
        return []
    get, two, mul = body[pos:pos + 3]
    if not (_is(get, "local.get") and _is(two, "i32.const", 2) and _is(mul, "i32.mul")):
        return []
    return [body[:pos] + (get, get, Instr("i32.add")) + body[pos + 3:]]


def fold_window(window) -> Instr | None:
    """Fold [const a, const b, binop] or [const a, eqz] to a constant, if defined."""
    if len(window) == 2 and _is(window[0], "i32.const") and _is(window[1], "i32.eqz"):
        return const(int(window[0].arg == 0))
    if len(window) == 3 and _is(window[0], "i32.const") and _is(window[1], "i32.const") \
            and window[2].op in BINOPS:
        try:
            return const(BINARY[window[2].op](window[0].arg, window[1].arg))
        except Trap:
            return None
    return None


def const_infer(body: Body, pos: int, rng: SplitMix64) -> list[Body]:
    for width in (3, 2):
        folded = fold_window(body[pos:pos + width]) if pos + width <= len(body) else None
        if folded is not None:
            return [body[:pos] + (folded,) + body[pos + width:]]
    return []


def shift_escaping(seq, amount: int = 1) -> list[Instr]:
    """Copy ``seq`` so it can sit ``amount`` labels deeper: branches that leave
    the sequence get their depth increased."""
    out = []
    nest = 0
    for ins in seq:
        if ins.op in BLOCK_OPS:
            nest += 1
        elif ins.op == "end":
            nest -= 1
        elif ins.op in ("br", "br_if") and ins.arg >= nest:
            ins = Instr(ins.op, ins.arg + amount)
        out.append(ins)
    return out


def _targets_enclosing(seq, level: int) -> bool:
    """Whether any branch in ``seq`` targets the label ``level`` frames out."""
    nest = 0
    for ins in seq:
        if ins.op in BLOCK_OPS:
            nest += 1
        elif ins.op == "end":
            nest -= 1
        elif ins.op in ("br", "br_if") and ins.arg == nest + level:
            return True
    return False


def loop_unroll(body: Body, pos: int, rng: SplitMix64) -> list[Body]:
    ins = body[pos]
    if ins.op != "loop" or ins.arg is not None:
        return []
    ends, _ = block_tables(body)
    end = ends[pos]
    inner = body[pos + 1:end]
    if len(inner) < 2 or not _is(inner[-1], "br_if", 0):
        return []
    work = inner[:-1]
    if _targets_enclosing(work, 0):
        return []
    unrolled = (
        (Instr("loop"),) + work
        + (Instr("if"),) + tuple(shift_escaping(work)) + (Instr("br_if", 1), Instr("end"))
        + (Instr("end"),)
    )
    return [body[:pos] + unrolled + body[end + 1:]]


@dataclass(frozen=True)
class RewriteRule:
    id: str
    apply: Callable[[Body, int, SplitMix64], list[Body]]

    def __repr__(self) -> str:
        return f"RewriteRule({self.id})"


# fixed application order
RULES: dict[str, RewriteRule] = {r.id: r for r in (
    RewriteRule("CONST_ADD_SPLIT", const_add_split),
    RewriteRule("ADD_SUB_INVERT", add_sub_invert),
    RewriteRule("MUL_FACTOR_SPLIT", mul_factor_split),
    RewriteRule("MUL2_TO_ADD", mul2_to_add),
    RewriteRule("CONST_INFER", const_infer),
    RewriteRule("LOOP_UNROLL", loop_unroll),
)}
RULE_ORDER = tuple(RULES)


def resolve_rules(ids) -> tuple[RewriteRule, ...]:
    """Rules for the given ids, in the fixed order; unknown ids raise."""
    ids = set(ids)
    unknown = ids - set(RULES)
    if unknown:
        raise KeyError(f"unknown rewrite rules: {', '.join(sorted(unknown))}")
    return tuple(RULES[i] for i in RULE_ORDER if i in ids)
