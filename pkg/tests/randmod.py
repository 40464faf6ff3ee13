"""Random well-typed modules for fuzzing the interpreter and the passes."""

from __future__ import annotations

import random

from multivariant.wat import FuncType, Function, Instr, Module, const
from multivariant.wat.ir import BINOPS

I32 = "i32"
SAFE_BINOPS = [op for op in BINOPS]
INTERESTING = [0, 1, 2, 3, 7, 31, 32, 255, 0x7FFFFFFF, 0x80000000, 0xFFFFFFFF, 0xFFFFFFFE]


class _Gen:
    def __init__(self, rng: random.Random, nparams: int, nlocals: int, callees, memory: bool,
                 arith_only: bool = False):
        self.rng = rng
        self.nparams = nparams
        # the last local of every function is reserved as a loop counter
        self.nvars = nparams + nlocals
        self.counter = nparams + nlocals
        self.callees = callees
        self.memory = memory
        self.arith_only = arith_only
        self.labels: list[int] = []  # label arity, innermost last
        self.loops = 0

    def constant(self) -> int:
        r = self.rng
        return r.choice(INTERESTING) if r.random() < 0.5 else r.getrandbits(32)

    def expr(self, depth: int) -> list[Instr]:
        r = self.rng
        leaf = depth <= 0 or r.random() < 0.25
        if leaf:
            if self.nvars and r.random() < 0.6:
                return [Instr("local.get", r.randrange(self.nvars))]
            return [const(self.constant())]
        choices = ["bin", "bin", "bin", "eqz", "tee"]
        if not self.arith_only:
            choices += ["select", "block", "if", "brblock", "call", "load"]
        kind = r.choice(choices)
        if kind == "bin":
            return self.expr(depth - 1) + self.expr(depth - 1) + [Instr(r.choice(SAFE_BINOPS))]
        if kind == "eqz":
            return self.expr(depth - 1) + [Instr("i32.eqz")]
        if kind == "tee" and self.nvars:
            return self.expr(depth - 1) + [Instr("local.tee", r.randrange(self.nvars))]
        if kind == "select":
            return self.expr(depth - 1) + self.expr(depth - 1) + self.expr(depth - 1) + [Instr("select")]
        if kind == "block":
            self.labels.append(1)
            body = self.stmts(depth - 1) + self.expr(depth - 1)
            self.labels.pop()
            return [Instr("block", I32)] + body + [Instr("end")]
        if kind == "if":
            cond = self.expr(depth - 1)
            self.labels.append(1)
            then = self.stmts(depth - 1) + self.expr(depth - 1)
            other = self.stmts(depth - 1) + self.expr(depth - 1)
            self.labels.pop()
            return cond + [Instr("if", I32)] + then + [Instr("else")] + other + [Instr("end")]
        if kind == "brblock":
            self.labels.append(1)
            body = self.expr(depth - 1) + self.expr(depth - 1) + [Instr("br_if", 0), Instr("drop")]
            body += self.stmts(depth - 1) + self.expr(depth - 1)
            if r.random() < 0.3:
                # unconditional exit followed by dead code
                body += [Instr("br", 0), Instr("i32.const", 5), Instr("drop")]
            self.labels.pop()
            return [Instr("block", I32)] + body + [Instr("end")]
        if kind == "call" and self.callees:
            name, ftype = r.choice(self.callees)
            out: list[Instr] = []
            for _ in range(ftype.arity):
                out += self.expr(depth - 1)
            out.append(Instr("call", name))
            if ftype.result is None:
                out.append(const(self.constant()))
            return out
        if kind == "load" and self.memory:
            return self.expr(depth - 1) + [const(0xFFFC), Instr("i32.and"), Instr("i32.load", r.choice([0, 0, 4]))]
        return [const(self.constant())]

    def stmts(self, depth: int) -> list[Instr]:
        out: list[Instr] = []
        for _ in range(self.rng.randrange(0, 3)):
            out += self.stmt(depth)
        return out

    def stmt(self, depth: int) -> list[Instr]:
        r = self.rng
        kinds = ["set", "drop", "nop"]
        if depth > 0 and not self.arith_only:
            kinds += ["voidblock", "voidif", "loop", "store", "brout"]
        kind = r.choice(kinds)
        if kind == "set" and self.nvars:
            return self.expr(depth - 1) + [Instr("local.set", r.randrange(self.nvars))]
        if kind == "drop":
            return self.expr(depth - 1) + [Instr("drop")]
        if kind == "voidblock":
            self.labels.append(0)
            body = self.stmts(depth - 1) + self.expr(depth - 1) + [Instr("br_if", 0)] + self.stmts(depth - 1)
            self.labels.pop()
            return [Instr("block")] + body + [Instr("end")]
        if kind == "voidif":
            cond = self.expr(depth - 1)
            self.labels.append(0)
            then = self.stmts(depth - 1)
            out = cond + [Instr("if")] + then
            if r.random() < 0.5:
                out += [Instr("else")] + self.stmts(depth - 1)
            self.labels.pop()
            return out + [Instr("end")]
        # loops share one counter local, so they never nest
        if kind == "loop" and self.loops < 1:
            self.loops += 1
            c = self.counter
            head = [const(r.randrange(1, 6)), Instr("local.set", c)]
            self.labels.append(0)
            body = self.stmts(depth - 1)
            self.labels.pop()
            tail = [Instr("local.get", c), const(1), Instr("i32.sub"), Instr("local.tee", c), Instr("br_if", 0)]
            self.loops -= 1
            return head + [Instr("loop")] + body + tail + [Instr("end")]
        if kind == "store" and self.memory:
            return (self.expr(depth - 1) + [const(0xFFFC), Instr("i32.and")] + self.expr(depth - 1)
                    + [Instr("i32.store", r.choice([0, 0, 4]))])
        if kind == "brout":
            void = [i for i, a in enumerate(reversed(self.labels)) if a == 0 and i > 0]
            if void:
                d = r.choice(void)
                return self.expr(depth - 1) + [Instr("br_if", d)]
        return [Instr("nop")]


def random_module(seed: int, nfuncs: int = 3, depth: int = 4, memory: bool | None = None,
                  arith_only: bool = False) -> Module:
    rng = random.Random(seed)
    if memory is None:
        memory = rng.random() < 0.3 and not arith_only
    funcs: list[Function] = []
    for i in range(nfuncs):
        nparams = rng.randrange(0, 3)
        result = I32 if rng.random() < 0.85 or i == nfuncs - 1 else None
        ftype = FuncType((I32,) * nparams, result)
        nlocals = rng.randrange(0, 3)
        callees = [(f.name, f.type) for f in funcs]
        gen = _Gen(rng, nparams, nlocals, callees, memory, arith_only)
        body = gen.stmts(depth)
        if result:
            body += gen.expr(depth)
        funcs.append(Function(f"f{i}", ftype, nlocals + 1, tuple(body)))
    exports = (("main", nfuncs - 1),)
    return Module(tuple(funcs), exports, (), 1 if memory else None)
