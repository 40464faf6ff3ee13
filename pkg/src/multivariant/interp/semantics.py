"""Pure i32 operator semantics on unsigned 32-bit representations."""

from __future__ import annotations

from .traps import DivideByZero, IntegerOverflow

M = 0xFFFFFFFF
SIGN = 0x80000000


def _signed(a: int) -> int:
    return a - ((a & SIGN) << 1)


def div_s(a: int, b: int) -> int:
    if b == 0:
        raise DivideByZero()
    x, y = _signed(a), _signed(b)
    if x == -SIGN and y == -1:
        raise IntegerOverflow()
    q = abs(x) // abs(y)
    return (-q if (x < 0) != (y < 0) else q) & M


def rem_s(a: int, b: int) -> int:
    if b == 0:
        raise DivideByZero()
    x, y = _signed(a), _signed(b)
    r = abs(x) % abs(y)
    return (-r if x < 0 else r) & M


BINARY = {
    "i32.add": lambda a, b: (a + b) & M,
    "i32.sub": lambda a, b: (a - b) & M,
    "i32.mul": lambda a, b: (a * b) & M,
    "i32.div_s": div_s,
    "i32.rem_s": rem_s,
    "i32.and": lambda a, b: a & b,
    "i32.or": lambda a, b: a | b,
    "i32.xor": lambda a, b: a ^ b,
    "i32.shl": lambda a, b: (a << (b & 31)) & M,
    "i32.shr_s": lambda a, b: (_signed(a) >> (b & 31)) & M,
    "i32.shr_u": lambda a, b: a >> (b & 31),
    "i32.eq": lambda a, b: int(a == b),
    "i32.ne": lambda a, b: int(a != b),
    "i32.lt_s": lambda a, b: int((a ^ SIGN) < (b ^ SIGN)),
    "i32.gt_s": lambda a, b: int((a ^ SIGN) > (b ^ SIGN)),
    "i32.le_s": lambda a, b: int((a ^ SIGN) <= (b ^ SIGN)),
    "i32.ge_s": lambda a, b: int((a ^ SIGN) >= (b ^ SIGN)),
}

# binops that can trap on some operands
TRAPPING = frozenset({"i32.div_s", "i32.rem_s"})


def eqz(a: int) -> int:
    return int(a == 0)
