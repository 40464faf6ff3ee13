"""Trap kinds raised by the interpreter."""


class Trap(RuntimeError):
    kind = "trap"

    def __init__(self, message: str = ""):
        super().__init__(message or self.kind)


class DivideByZero(Trap):
    kind = "div-by-zero"


class IntegerOverflow(Trap):
    kind = "overflow"


class MemoryOutOfBounds(Trap):
    kind = "memory-out-of-bounds"


class CallDepthExceeded(Trap):
    kind = "call-depth-exceeded"


class FuelExhausted(Trap):
    kind = "fuel-exhausted"


class StackUnderflow(Trap):
    # only reachable when running unvalidated code
    kind = "stack-underflow"


class InstantiationError(ValueError):
    pass
