from __future__ import annotations

from dataclasses import dataclass

from ..wat.ir import FuncType, Function, Module, Origin
from ..wat.template import dispatcher_body


def dispatcher_name(original: str) -> str:
    return f"{original}__dispatch"


@dataclass(frozen=True)
class DispatcherSpec:
    """A dispatcher for ``target``: ``choices`` are the callees in index order
    (variants first, the original last as the default)."""

    target: str
    choices: tuple[str, ...]
    rng_import: str
    type: FuncType

    def __post_init__(self) -> None:
        object.__setattr__(self, "choices", tuple(self.choices))
        if len(self.choices) < 2:
            raise ValueError("a dispatcher needs at least two choices")


def synthesize_dispatcher(spec: DispatcherSpec, module: Module | None = None) -> Function:
    """Build the dispatcher function; with ``module`` given, choice signatures are checked."""
    if module is not None:
        for name in spec.choices:
            ftype = module.callee_type(name)
            if ftype != spec.type:
                raise ValueError(f"choice {name} has signature {ftype}, expected {spec.type}")
    extra, body = dispatcher_body(spec.type, list(spec.choices), spec.rng_import)
    return Function(dispatcher_name(spec.target), spec.type, extra, tuple(body),
                    Origin.dispatcher(spec.target))
