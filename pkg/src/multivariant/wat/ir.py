"""In-memory representation of the WAT subset.

Values are i32 only. Constants are stored as unsigned 32-bit integers; signed
operations reinterpret them in two's complement.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

I32 = "i32"
MASK32 = 0xFFFFFFFF
PAGE_SIZE = 65536

RNG_MODULE = "env"
RNG_FIELD = "random_u32"


def u32(value: int) -> int:
    return value & MASK32


def s32(value: int) -> int:
    value &= MASK32
    return value - 0x100000000 if value & 0x80000000 else value


# opcode -> (pops, pushes); control and variable-arity ops are handled separately
BINOPS = (
    "i32.add", "i32.sub", "i32.mul", "i32.div_s", "i32.rem_s",
    "i32.and", "i32.or", "i32.xor", "i32.shl", "i32.shr_s", "i32.shr_u",
    "i32.eq", "i32.ne", "i32.lt_s", "i32.gt_s", "i32.le_s", "i32.ge_s",
)
SIMPLE_OPS: dict[str, tuple[int, int]] = {op: (2, 1) for op in BINOPS}
SIMPLE_OPS.update({
    "i32.const": (0, 1),
    "i32.eqz": (1, 1),
    "local.get": (0, 1),
    "local.set": (1, 0),
    "local.tee": (1, 1),
    "drop": (1, 0),
    "select": (3, 1),
    "nop": (0, 0),
    "i32.load": (1, 1),
    "i32.store": (2, 0),
})
CONTROL_OPS = ("block", "loop", "if", "else", "end", "br", "br_if", "return", "call")
OPCODES = frozenset(SIMPLE_OPS) | frozenset(CONTROL_OPS)

# opcodes carrying an integer immediate
INT_IMMEDIATE = frozenset({"i32.const", "local.get", "local.set", "local.tee",
                           "br", "br_if", "i32.load", "i32.store"})
BLOCK_OPS = frozenset({"block", "loop", "if"})
MEMORY_OPS = frozenset({"i32.load", "i32.store"})


@dataclass(frozen=True)
class Instr:
    """One instruction.

    ``arg`` holds the immediate: the u32 constant, a local index, a branch
    depth, a memory offset, the callee name for ``call``, or the block
    result type (``"i32"`` or ``None``) for block/loop/if.
    """

    op: str
    arg: int | str | None = None

    def __post_init__(self) -> None:
        if self.op == "i32.const":
            object.__setattr__(self, "arg", u32(self.arg))

    def __str__(self) -> str:
        if self.op in BLOCK_OPS:
            return f"{self.op} (result i32)" if self.arg else self.op
        if self.op == "call":
            return f"call ${self.arg}"
        if self.op == "i32.const":
            return f"i32.const {s32(self.arg)}"
        if self.op in MEMORY_OPS:
            return f"{self.op} offset={self.arg}" if self.arg else self.op
        if self.arg is None:
            return self.op
        return f"{self.op} {self.arg}"


def const(value: int) -> Instr:
    return Instr("i32.const", value)


@dataclass(frozen=True)
class FuncType:
    params: tuple[str, ...] = ()
    result: str | None = None

    @property
    def arity(self) -> int:
        return len(self.params)

    def __str__(self) -> str:
        parts = [f"(param {' '.join(self.params)})"] if self.params else []
        if self.result:
            parts.append(f"(result {self.result})")
        return " ".join(parts)


@dataclass(frozen=True)
class Origin:
    """Provenance of a function: original, a variant, or a dispatcher."""

    kind: str = "original"
    of: str | None = None
    rules: tuple[str, ...] = ()

    @classmethod
    def variant(cls, of: str, rules: Iterable[str]) -> "Origin":
        return cls("variant", of, tuple(rules))

    @classmethod
    def dispatcher(cls, of: str) -> "Origin":
        return cls("dispatcher", of)


ORIGINAL = Origin()


@dataclass(frozen=True)
class Function:
    name: str
    type: FuncType
    locals: int = 0
    body: tuple[Instr, ...] = ()
    origin: Origin = ORIGINAL

    @property
    def num_locals(self) -> int:
        return self.type.arity + self.locals

    def with_body(self, body: Iterable[Instr], **changes) -> "Function":
        return replace(self, body=tuple(body), **changes)

    def calls(self) -> Iterator[str]:
        for ins in self.body:
            if ins.op == "call":
                yield ins.arg

    def touches_memory(self) -> bool:
        return any(ins.op in MEMORY_OPS for ins in self.body)


@dataclass(frozen=True)
class Import:
    module: str
    field: str
    name: str
    type: FuncType

    @property
    def is_rng(self) -> bool:
        return (self.module, self.field) == (RNG_MODULE, RNG_FIELD) and \
            self.type == FuncType((), I32)


@dataclass(frozen=True)
class Module:
    functions: tuple[Function, ...] = ()
    exports: tuple[tuple[str, int], ...] = ()
    imports: tuple[Import, ...] = ()
    memory: int | None = None
    _by_name: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "exports", tuple(self.exports))
        object.__setattr__(self, "imports", tuple(self.imports))
        object.__setattr__(self, "_by_name", {f.name: i for i, f in enumerate(self.functions)})

    def index_of(self, name: str) -> int:
        return self._by_name[name]

    def function(self, name: str) -> Function:
        return self.functions[self._by_name[name]]

    def has_function(self, name: str) -> bool:
        return name in self._by_name

    def import_named(self, name: str) -> Import | None:
        for imp in self.imports:
            if imp.name == name:
                return imp
        return None

    def callee_type(self, name: str) -> FuncType | None:
        if name in self._by_name:
            return self.functions[self._by_name[name]].type
        imp = self.import_named(name)
        return imp.type if imp else None

    @property
    def export_map(self) -> dict[str, int]:
        return dict(self.exports)

    def resolve_export(self, export: str) -> Function:
        for ename, idx in self.exports:
            if ename == export:
                return self.functions[idx]
        raise KeyError(f"no export named {export!r}")

    def replace_functions(self, functions: Iterable[Function], **changes) -> "Module":
        return replace(self, functions=tuple(functions), **changes)
