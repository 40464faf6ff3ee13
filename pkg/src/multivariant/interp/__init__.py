"""Deterministic execution of WAT-subset modules with trace recording."""

from .instance import (DEFAULT_DEPTH, DEFAULT_FUEL, HostConfig, Instance, Trace, hash_trace,
                       instantiate, invoke, trace_json)
from .traps import (CallDepthExceeded, DivideByZero, FuelExhausted, InstantiationError,
                    IntegerOverflow, MemoryOutOfBounds, Trap)

__all__ = [
    "DEFAULT_DEPTH", "DEFAULT_FUEL", "HostConfig", "Instance", "Trace", "hash_trace",
    "instantiate", "invoke", "trace_json", "CallDepthExceeded", "DivideByZero", "FuelExhausted",
    "InstantiationError", "IntegerOverflow", "MemoryOutOfBounds", "Trap",
]
