"""Translate functions to Python source for fast execution.

Operand-stack slots become Python locals (stack heights are static in
validated code) and structured control flow maps onto ``while``/``if``.
A ``while True`` loop is emitted only for labels that some branch targets;
branches that cross several loops go through the ``_br`` variable.

The fast path is only trusted for runs that complete: any trap, any run that
would exceed the fuel limit, and any call chain deeper than ``FAST_DEPTH``
raises and the caller re-executes with the reference engine.
"""

from __future__ import annotations

import functools
import itertools

from ..wat.ir import BLOCK_OPS, Function
from .semantics import div_s, rem_s
from .traps import MemoryOutOfBounds

FAST_DEPTH = 300


class Bail(Exception):
    """Fast path gave up; rerun with the reference engine."""


def _load(mem, ea):
    if mem is None or ea + 4 > len(mem):
        raise MemoryOutOfBounds()
    return int.from_bytes(mem[ea:ea + 4], "little")


def _store(mem, ea, v):
    if mem is None or ea + 4 > len(mem):
        raise MemoryOutOfBounds()
    mem[ea:ea + 4] = v.to_bytes(4, "little")


_RUNTIME = {"_div_s": div_s, "_rem_s": rem_s, "_ld": _load, "_st": _store, "_Bail": Bail}

_INFIX = {
    "i32.add": "({a} + {b}) & 4294967295",
    "i32.sub": "({a} - {b}) & 4294967295",
    "i32.mul": "({a} * {b}) & 4294967295",
    "i32.and": "{a} & {b}",
    "i32.or": "{a} | {b}",
    "i32.xor": "{a} ^ {b}",
    "i32.shl": "({a} << ({b} & 31)) & 4294967295",
    "i32.shr_u": "{a} >> ({b} & 31)",
    "i32.shr_s": "(({a} - (({a} & 2147483648) << 1)) >> ({b} & 31)) & 4294967295",
    "i32.eq": "1 if {a} == {b} else 0",
    "i32.ne": "1 if {a} != {b} else 0",
    "i32.lt_s": "1 if ({a} ^ 2147483648) < ({b} ^ 2147483648) else 0",
    "i32.gt_s": "1 if ({a} ^ 2147483648) > ({b} ^ 2147483648) else 0",
    "i32.le_s": "1 if ({a} ^ 2147483648) <= ({b} ^ 2147483648) else 0",
    "i32.ge_s": "1 if ({a} ^ 2147483648) >= ({b} ^ 2147483648) else 0",
    "i32.div_s": "_div_s({a}, {b})",
    "i32.rem_s": "_rem_s({a}, {b})",
}


class _Label:
    __slots__ = ("kind", "id", "arity", "targeted", "escapes", "height")

    def __init__(self, kind: str, ident: int, arity: int):
        self.kind = kind
        self.id = ident
        self.arity = arity
        self.targeted = False
        self.escapes: set = set()
        self.height = 0


class _Block:
    __slots__ = ("label", "body", "else_body")

    def __init__(self, label: _Label):
        self.label = label
        self.body: list = []
        self.else_body: list | None = None


class _Branch:
    __slots__ = ("op", "target")

    def __init__(self, op: str, target: _Label):
        self.op = op
        self.target = target


def _build_tree(func: Function) -> tuple[list, _Label]:
    ids = itertools.count(1)
    func_label = _Label("func", 0, 1 if func.type.result else 0)
    root: list = []
    seqs = [root]
    labels = [func_label]
    for ins in func.body:
        op = ins.op
        if op in BLOCK_OPS:
            node = _Block(_Label(op, next(ids), 1 if ins.arg else 0))
            seqs[-1].append(node)
            seqs.append(node.body)
            labels.append(node.label)
        elif op == "else":
            seqs.pop()
            block = seqs[-1][-1]
            block.else_body = []
            seqs.append(block.else_body)
        elif op == "end":
            seqs.pop()
            labels.pop()
        elif op in ("br", "br_if"):
            target = labels[-1 - ins.arg]
            target.targeted = True
            if target is not func_label:
                for inner in labels[len(labels) - ins.arg:]:
                    inner.escapes.add(target)
            seqs[-1].append(_Branch(op, target))
        else:
            seqs[-1].append(ins)
    return root, func_label


class _Emitter:
    def __init__(self, func: Function):
        self.func = func
        self.lines: list[str] = []
        self.level = 1
        self.pending = 0
        self.h = 0
        self.wrapped: list[_Label] = []
        self.result = 1 if func.type.result else 0

    def emit(self, line: str) -> None:
        self.lines.append("    " * self.level + line)

    def flush(self) -> None:
        if self.pending:
            self.emit(f"_u += {self.pending}")
            self.pending = 0

    def ret(self) -> None:
        fuel = f"_u + {self.pending}" if self.pending else "_u"
        self.pending = 0
        self.emit(f"_c.fuel += {fuel}")
        self.emit(f"return s{self.h - 1}" if self.result else "return")

    def loop_again(self, label: _Label) -> None:
        self.emit("if _c.fuel + _u > _c.fuel_limit: raise _Bail")
        self.emit("continue")

    def seq(self, nodes: list) -> bool:
        """Emit a sequence; return whether its end is reachable."""
        start = len(self.lines)
        reachable = True
        for node in nodes:
            if isinstance(node, _Block):
                reachable = self.block(node)
            elif isinstance(node, _Branch):
                reachable = self.branch(node)
            else:
                reachable = self.instr(node)
            if not reachable:
                break
        if len(self.lines) == start:
            self.emit("pass")
        return reachable

    def instr(self, ins) -> bool:
        op = ins.op
        h = self.h
        self.pending += 1
        if op == "i32.const":
            self.emit(f"s{h} = {ins.arg}")
            self.h += 1
        elif op == "local.get":
            self.emit(f"s{h} = l{ins.arg}")
            self.h += 1
        elif op == "local.set":
            self.emit(f"l{ins.arg} = s{h - 1}")
            self.h -= 1
        elif op == "local.tee":
            self.emit(f"l{ins.arg} = s{h - 1}")
        elif op in _INFIX:
            self.emit(f"s{h - 2} = " + _INFIX[op].format(a=f"s{h - 2}", b=f"s{h - 1}"))
            self.h -= 1
        elif op == "i32.eqz":
            self.emit(f"s{h - 1} = 1 if s{h - 1} == 0 else 0")
        elif op == "drop":
            self.h -= 1
        elif op == "select":
            self.emit(f"s{h - 3} = s{h - 3} if s{h - 1} else s{h - 2}")
            self.h -= 2
        elif op == "nop":
            pass
        elif op == "i32.load":
            self.emit(f"s{h - 1} = _ld(_c.mem, s{h - 1} + {ins.arg})")
        elif op == "i32.store":
            self.emit(f"_st(_c.mem, s{h - 2} + {ins.arg}, s{h - 1})")
            self.h -= 2
        elif op == "call":
            return self.call(ins.arg)
        elif op == "return":
            self.ret()
            return False
        else:  # pragma: no cover
            raise ValueError(f"cannot compile {op}")
        return True

    def call(self, callee: str) -> bool:
        ftype = self.callee_types[callee]
        n = ftype.arity
        base = self.h - n
        args = "".join(f", s{i}" for i in range(base, self.h))
        self.flush()
        target = f"_fn[{callee!r}](_c, _d + 1{args})"
        if ftype.result:
            self.emit(f"s{base} = {target}")
            self.h = base + 1
        else:
            self.emit(target)
            self.h = base
        return True

    def branch(self, node: _Branch) -> bool:
        target = node.target
        self.pending += 1
        if node.op == "br_if":
            self.h -= 1
            self.emit(f"if s{self.h}:")
            self.level += 1
            saved = self.pending
            self.jump(target)
            self.level -= 1
            self.pending = saved
            return True
        self.jump(target)
        return False

    def jump(self, target: _Label) -> None:
        if target.kind == "func":
            self.ret()
            return
        arity = 0 if target.kind == "loop" else target.arity
        if arity and target.height != self.h - 1:
            self.emit(f"s{target.height} = s{self.h - 1}")
        self.flush()
        inner = self.wrapped[-1]
        if inner is target:
            if target.kind == "loop":
                self.loop_again(target)
            else:
                self.emit("break")
        else:
            self.emit(f"_br = {target.id}")
            self.emit("break")

    def block(self, node: _Block) -> bool:
        lab = node.label
        kind = lab.kind
        self.pending += 1
        if kind == "if":
            self.h -= 1
        lab.height = self.h
        self.flush()
        wrapped = lab.targeted
        if wrapped:
            self.emit("while True:")
            self.level += 1
            self.wrapped.append(lab)
        h0 = self.h
        if kind == "if":
            self.emit(f"if s{h0}:")
            self.level += 1
            then_end = self.seq(node.body)
            if then_end:
                self.pending += 2 if node.else_body is not None else 1
                self.flush()
                if wrapped:
                    self.emit("break")
            self.level -= 1
            self.pending = 0
            self.h = h0
            self.emit("else:")
            self.level += 1
            if node.else_body is not None:
                else_end = self.seq(node.else_body)
            else:
                else_end = True
            if else_end:
                self.pending += 1
                self.flush()
                if wrapped:
                    self.emit("break")
            self.level -= 1
            end_reachable = then_end or else_end
        else:
            end_reachable = self.seq(node.body)
            if end_reachable:
                self.pending += 1
                self.flush()
                if wrapped:
                    self.emit("break")
        self.pending = 0
        if wrapped:
            self.level -= 1
            self.wrapped.pop()
            self.propagate(lab)
        self.h = h0 + lab.arity
        if kind == "loop":
            return end_reachable
        return end_reachable or wrapped

    def propagate(self, lab: _Label) -> None:
        if not lab.escapes:
            return
        outer = self.wrapped[-1] if self.wrapped else None
        self.emit("if _br:")
        self.level += 1
        if outer is not None and outer in lab.escapes:
            self.emit(f"if _br == {outer.id}:")
            self.level += 1
            self.emit("_br = 0")
            if outer.kind == "loop":
                self.loop_again(outer)
            else:
                self.emit("break")
            self.level -= 1
            if len(lab.escapes) > 1:
                self.emit("break")
        else:
            self.emit("break")
        self.level -= 1

    def function(self, callee_types) -> str:
        func = self.func
        self.callee_types = callee_types
        tree, func_label = _build_tree(func)
        params = "".join(f", l{i}" for i in range(func.type.arity))
        self.emit("if _d > _c.max_depth: raise _Bail")
        self.emit(f"_c.trace.append({func.name!r})")
        self.emit("_c.depths.append(_d)")
        self.emit("_fn = _c.funcs")
        self.emit("_u = 0")
        self.emit("_br = 0")
        for i in range(func.type.arity, func.num_locals):
            self.emit(f"l{i} = 0")
        if self.seq(tree):
            self.ret()
        return f"def _compiled(_c, _d{params}):\n" + "\n".join(self.lines) + "\n"


@functools.lru_cache(maxsize=8192)
def compile_function(func: Function, callee_types: tuple) -> object:
    """Return a Python callable ``f(ctx, depth, *args)`` for ``func``.

    ``callee_types`` is a sorted tuple of (name, FuncType) pairs for the
    functions and imports that ``func`` calls.
    """
    src = _Emitter(func).function(dict(callee_types))
    namespace = dict(_RUNTIME)
    exec(compile(src, f"<wasm:{func.name}>", "exec"), namespace)
    fn = namespace["_compiled"]
    fn.source = src
    return fn


def function_source(func: Function, callee_types: dict) -> str:
    return _Emitter(func).function(callee_types)
