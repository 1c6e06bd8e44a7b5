"""Arithmetic in the prime field Z/pZ."""

from __future__ import annotations

import math
from dataclasses import dataclass

DEFAULT_PRIME = 6972593

# products of two residues must fit a signed 64-bit integer
_MAX_PRIME = 3037000499


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    for d in range(3, math.isqrt(p) + 1, 2):
        if p % d == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Prime modulus for homology coefficients."""

    p: int = DEFAULT_PRIME

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise ValueError(f"{self.p!r} is not a prime")
        if self.p > _MAX_PRIME:
            raise ValueError(f"prime {self.p} too large for 64-bit products")

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return pow(a, self.p - 2, self.p)


def add(a: int, b: int, field: FieldSpec) -> int:
    return field.add(a, b)


def mul(a: int, b: int, field: FieldSpec) -> int:
    return field.mul(a, b)


def inv(a: int, field: FieldSpec) -> int:
    return field.inv(a)
