"""Small-step reference interpreter.

Exact by construction: fuel is charged and checked before every instruction,
and calls are iterative, so any call depth up to the limit is reachable.
The compiled engine defers to this one whenever a run does not complete
cleanly.
"""

from __future__ import annotations

from .semantics import BINARY, M, eqz
from .traps import CallDepthExceeded, FuelExhausted, MemoryOutOfBounds, StackUnderflow


def block_tables(body) -> tuple[dict[int, int], dict[int, int]]:
    """Map each block/loop/if position to its matching end (and else)."""
    ends: dict[int, int] = {}
    elses: dict[int, int] = {}
    open_: list[int] = []
    for pc, ins in enumerate(body):
        if ins.op in ("block", "loop", "if"):
            open_.append(pc)
        elif ins.op == "else":
            elses[open_[-1]] = pc
        elif ins.op == "end":
            ends[open_.pop()] = pc
    return ends, elses


class _Code:
    __slots__ = ("func", "body", "ends", "elses", "else_to_if", "nparams", "nlocals", "result")

    def __init__(self, func):
        self.func = func
        self.body = func.body
        self.ends, self.elses = block_tables(func.body)
        self.else_to_if = {e: i for i, e in self.elses.items()}
        self.nparams = func.type.arity
        self.nlocals = func.num_locals
        self.result = 1 if func.type.result else 0


class _Frame:
    __slots__ = ("code", "locals", "pc", "base", "labels", "depth")

    def __init__(self, code, args, base, depth):
        self.code = code
        self.locals = list(args) + [0] * (code.nlocals - code.nparams)
        self.pc = 0
        self.base = base
        # (br target pc, stack height, label arity, end pc)
        self.labels: list[tuple[int, int, int, int]] = []
        self.depth = depth


class ReferenceEngine:
    def __init__(self, module):
        self.module = module
        self.codes = {f.name: _Code(f) for f in module.functions}

    def run(self, ctx, name: str, args: list[int]):
        """Execute ``name``; ``ctx`` supplies fuel/trace/memory/host state."""
        stack: list[int] = []
        limit = ctx.fuel_limit
        host = ctx.host
        mem = ctx.mem
        frames: list[_Frame] = []

        def enter(fname: str, fargs, depth: int) -> None:
            if depth > ctx.depth_limit:
                raise CallDepthExceeded()
            ctx.trace.append(fname)
            ctx.depths.append(depth)
            frames.append(_Frame(self.codes[fname], fargs, len(stack), depth))

        def pop() -> int:
            if len(stack) <= frames[-1].base:
                raise StackUnderflow()
            return stack.pop()

        enter(name, args, 1)
        while True:
            fr = frames[-1]
            code = fr.code
            body = code.body
            pc = fr.pc
            if pc >= len(body):
                # implicit function end
                result = stack[-1] if code.result else None
                del stack[fr.base:]
                frames.pop()
                if not frames:
                    return result
                if result is not None:
                    stack.append(result)
                continue
            if ctx.fuel >= limit:
                raise FuelExhausted()
            ctx.fuel += 1
            ins = body[pc]
            op = ins.op
            fr.pc = pc + 1
            if op == "i32.const":
                stack.append(ins.arg)
            elif op == "local.get":
                stack.append(fr.locals[ins.arg])
            elif op == "local.set":
                fr.locals[ins.arg] = pop()
            elif op == "local.tee":
                v = pop()
                fr.locals[ins.arg] = v
                stack.append(v)
            elif op in BINARY:
                b = pop()
                a = pop()
                stack.append(BINARY[op](a, b))
            elif op == "i32.eqz":
                stack.append(eqz(pop()))
            elif op == "drop":
                pop()
            elif op == "select":
                c = pop()
                b = pop()
                a = pop()
                stack.append(a if c else b)
            elif op == "nop":
                pass
            elif op == "i32.load":
                ea = pop() + ins.arg
                if mem is None or ea + 4 > len(mem):
                    raise MemoryOutOfBounds()
                stack.append(int.from_bytes(mem[ea:ea + 4], "little"))
            elif op == "i32.store":
                v = pop()
                ea = pop() + ins.arg
                if mem is None or ea + 4 > len(mem):
                    raise MemoryOutOfBounds()
                mem[ea:ea + 4] = v.to_bytes(4, "little")
            elif op == "call":
                callee = ins.arg
                if callee in host:
                    stack.append(host[callee]())
                    continue
                n = self.codes[callee].nparams
                if len(stack) - n < fr.base:
                    raise StackUnderflow()
                cargs = stack[len(stack) - n:] if n else []
                del stack[len(stack) - n:]
                enter(callee, cargs, fr.depth + 1)
            elif op == "block" or op == "loop":
                end = code.ends[pc]
                arity = 1 if ins.arg else 0
                if op == "loop":
                    fr.labels.append((pc + 1, len(stack), 0, end))
                else:
                    fr.labels.append((end + 1, len(stack), arity, end))
            elif op == "if":
                cond = pop()
                end = code.ends[pc]
                fr.labels.append((end + 1, len(stack), 1 if ins.arg else 0, end))
                if not cond:
                    fr.pc = code.elses[pc] + 1 if pc in code.elses else end
            elif op == "else":
                fr.pc = code.ends[code.else_to_if[pc]]
            elif op == "end":
                fr.labels.pop()
            elif op == "br" or op == "br_if":
                if op == "br_if" and not pop():
                    continue
                self._branch(fr, stack, ins.arg)
            elif op == "return":
                fr.pc = len(body)
                if code.result:
                    v = stack[-1]
                    del stack[fr.base:]
                    stack.append(v)
                else:
                    del stack[fr.base:]
            else:  # pragma: no cover - rejected by validation
                raise ValueError(f"unknown opcode {op}")

    @staticmethod
    def _branch(fr: _Frame, stack: list[int], depth: int) -> None:
        if depth == len(fr.labels):
            # branch to the function body label: return
            fr.pc = len(fr.code.body)
            keep = stack[-1:] if fr.code.result else []
            del stack[fr.base:]
            stack.extend(keep)
            return
        target, height, arity, end = fr.labels[-1 - depth]
        keep = stack[len(stack) - arity:] if arity else []
        del stack[height:]
        stack.extend(keep)
        if target == end + 1:
            del fr.labels[len(fr.labels) - 1 - depth:]
        else:
            # loop: its label stays active
            del fr.labels[len(fr.labels) - depth:]
        fr.pc = target


__all__ = ["ReferenceEngine", "block_tables", "M"]
