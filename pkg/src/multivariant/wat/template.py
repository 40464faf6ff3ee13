"""Instruction template shared by the dispatcher synthesizer and the validator.

Every choice is guarded by its own equality test, so a dispatch costs the same
number of instructions whichever callee is selected.
"""

from __future__ import annotations

from .ir import I32, FuncType, Instr, const


def select_index(rng_name: str, k: int, scratch: int) -> list[Instr]:
    """Compute ``random_u32() mod k`` (unsigned) into local ``scratch``.

    The subset has no unsigned remainder, so it is derived from the halved
    value: ``x mod k == (2 * ((x >> 1) mod k) + (x & 1)) mod k``.
    """
    return [
        Instr("call", rng_name),
        Instr("local.tee", scratch),
        const(1), Instr("i32.shr_u"),
        const(k), Instr("i32.rem_s"),
        const(1), Instr("i32.shl"),
        Instr("local.get", scratch),
        const(1), Instr("i32.and"),
        Instr("i32.add"),
        const(k), Instr("i32.rem_s"),
        Instr("local.set", scratch),
    ]


def dispatcher_body(ftype: FuncType, choices: list[str], rng_name: str) -> tuple[int, list[Instr]]:
    """Return (extra local count, body) of a dispatcher over ``choices``."""
    nparams = ftype.arity
    idx = nparams
    res = nparams + 1
    has_result = ftype.result == I32
    body = select_index(rng_name, len(choices), idx)
    for i, callee in enumerate(choices):
        body += [Instr("local.get", idx), const(i), Instr("i32.eq"), Instr("if")]
        body += [Instr("local.get", p) for p in range(nparams)]
        body.append(Instr("call", callee))
        if has_result:
            body.append(Instr("local.set", res))
        body.append(Instr("end"))
    if has_result:
        body.append(Instr("local.get", res))
    return (2 if has_result else 1), body


def dispatcher_choices(body) -> list[str]:
    """Callees of a dispatcher-shaped body in choice order (rng call excluded)."""
    return [ins.arg for ins in body[1:] if ins.op == "call"]
