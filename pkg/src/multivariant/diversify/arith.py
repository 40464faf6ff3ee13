"""Modular arithmetic behind the constant-splitting rewrites (mod 2**32)."""

from __future__ import annotations

from ..rng import SplitMix64

MOD = 1 << 32
MASK = MOD - 1


def mod_inverse(a: int) -> int:
    """Multiplicative inverse of an odd ``a`` modulo 2**32.

    Newton iteration x <- x * (2 - a*x) doubles the number of correct low
    bits per step; x = a is already correct to 3 bits for odd a.
    """
    a &= MASK
    if a % 2 == 0:
        raise ValueError(f"{a} is not invertible modulo 2**32")
    x = a
    for _ in range(4):  # 3 -> 6 -> 12 -> 24 -> 48 bits
        x = (x * (2 - a * x)) & MASK
    return x


def split_mul_const(c: int, rng: SplitMix64) -> tuple[int, int]:
    """Return (a, b) with a odd, a*b == c (mod 2**32) and (a, b) != (1, c)."""
    c &= MASK
    while True:
        a = rng.next_u32() | 1
        if a != 1:
            return a, (c * mod_inverse(a)) & MASK


def split_add_const(c: int, n: int, rng: SplitMix64) -> list[int]:
    """Return ``n`` terms summing to ``c`` modulo 2**32."""
    if n < 2:
        raise ValueError("n must be at least 2")
    parts = [rng.next_u32() for _ in range(n - 1)]
    parts.append((c - sum(parts)) & MASK)
    return parts
