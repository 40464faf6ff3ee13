"""Differential-testing equivalence oracle.

Two functions are deemed equivalent when, on every probe input, they produce
the same result (or trap the same way) and leave the same values in the
probed memory words.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..interp import HostConfig, Instance, Trap
from ..rng import SplitMix64
from ..wat.ir import Function, Module, u32

DEFAULT_BOUNDARY = tuple(u32(v) for v in (
    0, 1, -1, 2, -2, 3, -3, 255, 256, 65535, 65536, (1 << 31) - 1, -(1 << 31),
))
REQUIRED_BOUNDARY = frozenset(u32(v) for v in (0, 1, -1, 2, -2, (1 << 31) - 1, -(1 << 31)))


@dataclass(frozen=True)
class OracleConfig:
    random_samples: int = 4096
    boundary: tuple[int, ...] = DEFAULT_BOUNDARY
    memory_probe_cells: int = 64
    seed: int = 0x5EED
    fuel_limit: int = 1_000_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundary", tuple(u32(b) for b in self.boundary))
        if self.random_samples < 1:
            raise ValueError("random_samples must be positive")
        missing = REQUIRED_BOUNDARY - set(self.boundary)
        if missing:
            raise ValueError(f"boundary set lacks {sorted(missing)}")


@dataclass(frozen=True)
class Counterexample:
    args: tuple[int, ...]
    expected: tuple
    actual: tuple

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Equivalent:
    inputs: int = 0

    def __bool__(self) -> bool:
        return True


def _random_arg(rng: SplitMix64) -> int:
    pick = rng.below(4)
    if pick == 0:
        return rng.below(64)
    if pick == 1:
        return u32(-1 - rng.below(64))
    return rng.next_u32()


def oracle_inputs(arity: int, cfg: OracleConfig) -> list[tuple[int, ...]]:
    if arity == 0:
        return [()]
    b = cfg.boundary
    if arity <= 2:
        inputs = list(itertools.product(b, repeat=arity))
    else:
        inputs = [(v,) * arity for v in b]
    rng = SplitMix64(cfg.seed)
    for _ in range(cfg.random_samples):
        inputs.append(tuple(_random_arg(rng) for _ in range(arity)))
    return inputs


_PROBE = "__oracle_probe__"


class EquivalenceOracle:
    """Checks candidates against one reference function.

    ``context`` supplies the callees; the reference's outputs are computed once
    and reused for every candidate.
    """

    def __init__(self, reference: Function, cfg: OracleConfig | None = None,
                 context: Module | None = None):
        self.reference = reference
        self.cfg = cfg or OracleConfig()
        if context is None:
            if any(True for _ in reference.calls()):
                raise ValueError(f"{reference.name} calls other functions; pass the module as context")
            context = Module((reference,))
        elif not context.has_function(reference.name):
            context = context.replace_functions(context.functions + (reference,))
        self.context = context
        self.inputs = oracle_inputs(reference.type.arity, self.cfg)
        self.expected = self._outcomes(reference)

    def _outcomes(self, func: Function) -> list[tuple]:
        ctx = self.context
        probe = Function(_PROBE, func.type, func.locals, func.body, func.origin)
        module = ctx.replace_functions(ctx.functions + (probe,), exports=(("probe", len(ctx.functions)),))
        host = HostConfig(rng_seed=self.cfg.seed, fuel_limit=self.cfg.fuel_limit)
        inst = Instance(module, host)
        cells = self.cfg.memory_probe_cells
        out = []
        for args in self.inputs:
            if inst.memory is not None:
                inst.memory[:] = bytes(len(inst.memory))
            inst.rng.state = host.rng_seed
            try:
                result, _ = inst.invoke("probe", args)
                outcome = (result, None)
            except Trap as trap:
                outcome = (None, trap.kind)
            if inst.memory is not None and cells:
                outcome += (bytes(inst.memory[:4 * cells]),)
            out.append(outcome)
        return out

    def check(self, candidate: Function) -> Equivalent | Counterexample:
        if candidate.type != self.reference.type:
            raise ValueError("candidate signature differs from the reference")
        actual = self._outcomes(candidate)
        for args, exp, act in zip(self.inputs, self.expected, actual):
            if exp != act:
                return Counterexample(args, exp, act)
        return Equivalent(len(self.inputs))


def check_equivalence(f: Function, g: Function, cfg: OracleConfig | None = None,
                      context: Module | None = None) -> Equivalent | Counterexample:
    """Compare ``g`` against ``f`` on boundary and random inputs.

    Returns an ``Equivalent`` (truthy) or the first ``Counterexample`` (falsy).
    """
    return EquivalenceOracle(f, cfg, context).check(g)
