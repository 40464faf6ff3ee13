"""Module instances: memory, host RNG, and invocation with tracing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..rng import SplitMix64
from ..wat.ir import PAGE_SIZE, Module, s32, u32
from .compiled import FAST_DEPTH, Bail, compile_function
from .reference import ReferenceEngine
from .traps import InstantiationError, Trap

DEFAULT_FUEL = 50_000_000
DEFAULT_DEPTH = 10_000


@dataclass(frozen=True)
class HostConfig:
    rng_seed: int = 0
    fuel_limit: int = DEFAULT_FUEL
    call_depth_limit: int = DEFAULT_DEPTH

    def __post_init__(self) -> None:
        if self.fuel_limit <= 0 or self.call_depth_limit <= 0:
            raise ValueError("limits must be positive")
        object.__setattr__(self, "rng_seed", self.rng_seed & ((1 << 64) - 1))


@dataclass(frozen=True)
class Trace:
    entries: tuple[str, ...]
    fuel: int
    # call depth of each entry (endpoint = 1); not part of the trace identity
    depths: tuple[int, ...] = field(default=(), compare=False)


def hash_trace(trace: Trace | list | tuple) -> str:
    """SHA-256 of the entry names joined by newlines, lowercase hex."""
    entries = trace.entries if isinstance(trace, Trace) else trace
    return hashlib.sha256("\n".join(entries).encode("utf-8")).hexdigest()


def trace_json(endpoint: str, trace: Trace, result: int | None) -> str:
    return json.dumps({
        "endpoint": endpoint,
        "entries": list(trace.entries),
        "fuel": trace.fuel,
        "hash": hash_trace(trace),
        "result": result,
    })


class _Context:
    __slots__ = ("fuel", "fuel_limit", "depth_limit", "max_depth", "trace", "depths",
                 "mem", "funcs", "host")

    def __init__(self, inst: "Instance", funcs, fast: bool):
        cfg = inst.config
        self.fuel = 0
        self.fuel_limit = cfg.fuel_limit
        self.depth_limit = cfg.call_depth_limit
        self.max_depth = min(cfg.call_depth_limit, FAST_DEPTH) if fast else cfg.call_depth_limit
        self.trace: list[str] = []
        self.depths: list[int] = []
        self.mem = inst.memory
        self.funcs = funcs
        self.host = inst._host


class Instance:
    """A module bound to linear memory and a seeded RNG.

    Memory and RNG state persist across invocations, like a long-lived
    worker on an edge node.
    """

    def __init__(self, module: Module, config: HostConfig | None = None):
        self.module = module
        self.config = config or HostConfig()
        for imp in module.imports:
            if not imp.is_rng:
                raise InstantiationError(
                    f"unsupported import {imp.module}.{imp.field}: only env.random_u32 () -> i32 is provided")
        self.memory = bytearray(module.memory * PAGE_SIZE) if module.memory is not None else None
        self.rng = SplitMix64(self.config.rng_seed)
        rng = self.rng
        self._host = {imp.name: rng.next_u32 for imp in module.imports}
        types = {f.name: f.type for f in module.functions}
        types.update({imp.name: imp.type for imp in module.imports})
        self._fast = {}
        for f in module.functions:
            callees = tuple(sorted({(c, types[c]) for c in f.calls()}, key=lambda p: p[0]))
            self._fast[f.name] = compile_function(f, callees)
        for name, draw in self._host.items():
            self._fast[name] = lambda _c, _d, _draw=draw: _draw()
        self._reference: ReferenceEngine | None = None

    def _resolve(self, endpoint: str):
        for ename, idx in self.module.exports:
            if ename == endpoint:
                return self.module.functions[idx]
        if self.module.has_function(endpoint):
            return self.module.function(endpoint)
        raise KeyError(f"endpoint {endpoint!r} is not exported")

    def invoke(self, endpoint: str, args=()) -> tuple[int | None, Trace]:
        """Run an exported function; raises a Trap subclass on a trap."""
        func = self._resolve(endpoint)
        args = [u32(a) for a in args]
        if len(args) != func.type.arity:
            raise ValueError(f"{endpoint} expects {func.type.arity} arguments, got {len(args)}")
        snapshot = bytes(self.memory) if self.memory is not None else None
        rng_state = self.rng.state
        ctx = _Context(self, self._fast, fast=True)
        try:
            result = self._fast[func.name](ctx, 1, *args)
            if ctx.fuel > ctx.fuel_limit:
                raise Bail()
        except (Trap, Bail, RecursionError):
            if snapshot is not None:
                self.memory[:] = snapshot
            self.rng.state = rng_state
            ctx = _Context(self, self._fast, fast=False)
            if self._reference is None:
                self._reference = ReferenceEngine(self.module)
            result = self._reference.run(ctx, func.name, args)
        trace = Trace(tuple(ctx.trace), ctx.fuel, tuple(ctx.depths))
        return (s32(result) if result is not None else None), trace

    def invoke_compiled(self, endpoint: str, args=()) -> tuple[int | None, Trace]:
        """Run with the compiled engine only; raises ``Bail`` where it would defer."""
        func = self._resolve(endpoint)
        args = [u32(a) for a in args]
        ctx = _Context(self, self._fast, fast=True)
        result = self._fast[func.name](ctx, 1, *args)
        if ctx.fuel > ctx.fuel_limit:
            raise Bail()
        return (s32(result) if result is not None else None), Trace(tuple(ctx.trace), ctx.fuel,
                                                                    tuple(ctx.depths))

    def invoke_reference(self, endpoint: str, args=()) -> tuple[int | None, Trace]:
        """Run with the small-step engine only (for differential checks)."""
        func = self._resolve(endpoint)
        args = [u32(a) for a in args]
        if len(args) != func.type.arity:
            raise ValueError(f"{endpoint} expects {func.type.arity} arguments, got {len(args)}")
        ctx = _Context(self, self._fast, fast=False)
        if self._reference is None:
            self._reference = ReferenceEngine(self.module)
        result = self._reference.run(ctx, func.name, args)
        return (s32(result) if result is not None else None), Trace(tuple(ctx.trace), ctx.fuel,
                                                                    tuple(ctx.depths))


def instantiate(module: Module, config: HostConfig | None = None) -> Instance:
    return Instance(module, config)


def invoke(inst: Instance, endpoint: str, args=()) -> tuple[int | None, Trace]:
    return inst.invoke(endpoint, args)
