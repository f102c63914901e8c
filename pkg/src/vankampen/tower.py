"""Integers that may be too large to hold exactly.

``Exact`` wraps a Python int.  Once a value would exceed the configured bit
cap it becomes ``Saturated``: only its sign, a lower bound ``2**floor_bits``
on its magnitude, and (sometimes) its parity survive.  Operations that would
need more than that raise :class:`UndecidedAtCap`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

DEFAULT_BIT_CAP = 4096


class UndecidedAtCap(Exception):
    """A computation needed information lost at the saturation cap."""


@dataclass(frozen=True)
class Exact:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Saturated:
    sign: int
    floor_bits: int
    parity_known: bool = False
    parity: Optional[int] = None

    def __str__(self):
        return f"{'-' if self.sign < 0 else ''}>=2^{self.floor_bits}"


TowerInt = Union[Exact, Saturated]

ZERO = Exact(0)


def exact(value: int, cap: int = DEFAULT_BIT_CAP) -> TowerInt:
    if value.bit_length() > cap:
        return Saturated(1 if value > 0 else -1, value.bit_length() - 1, True, value & 1)
    return Exact(value)


def is_zero(a: TowerInt) -> bool:
    return isinstance(a, Exact) and a.value == 0


def sign(a: TowerInt) -> int:
    if isinstance(a, Saturated):
        return a.sign
    return (a.value > 0) - (a.value < 0)


def neg(a: TowerInt) -> TowerInt:
    if isinstance(a, Saturated):
        return Saturated(-a.sign, a.floor_bits, a.parity_known, a.parity)
    return Exact(-a.value)


def add(a: TowerInt, b: TowerInt, cap: int = DEFAULT_BIT_CAP) -> TowerInt:
    if isinstance(a, Exact) and isinstance(b, Exact):
        return exact(a.value + b.value, cap)
    if isinstance(a, Exact):
        a, b = b, a
    # a is Saturated from here on
    if isinstance(b, Exact):
        # |b| fits in the cap, so |a + b| >= 2^floor_bits - 2^cap; keep a bound of floor_bits - 1.
        if b.value.bit_length() >= a.floor_bits:
            raise UndecidedAtCap("saturated sum with a comparable exact term")
        parity = (a.parity + b.value) & 1 if a.parity_known else None
        return Saturated(a.sign, a.floor_bits - 1 if b.value and sign(b) != a.sign else a.floor_bits,
                         a.parity_known, parity)
    if a.sign != b.sign:
        raise UndecidedAtCap("cancellation between two saturated values")
    known = a.parity_known and b.parity_known
    return Saturated(a.sign, max(a.floor_bits, b.floor_bits), known,
                     (a.parity + b.parity) & 1 if known else None)


def shift(a: TowerInt, m: int, cap: int = DEFAULT_BIT_CAP) -> TowerInt:
    """``a * 2**m`` for ``m >= 0``."""
    if m < 0:
        raise ValueError("shift amount must be non-negative")
    if m == 0:
        return a
    if isinstance(a, Saturated):
        return Saturated(a.sign, a.floor_bits + m, True, 0)
    if a.value == 0:
        return a
    if a.value.bit_length() + m > cap:
        return Saturated(sign(a), a.value.bit_length() - 1 + m, True, 0)
    return Exact(a.value << m)


def two_adic_valuation(a: TowerInt) -> int:
    """Largest ``v`` with ``2**v | a`` (``a`` nonzero and Exact)."""
    if isinstance(a, Saturated):
        raise UndecidedAtCap("2-adic valuation of a saturated value")
    if a.value == 0:
        raise ValueError("valuation of zero")
    v = a.value
    return (v & -v).bit_length() - 1


def halve(a: TowerInt, m: int) -> TowerInt:
    """``a / 2**m``; the caller guarantees divisibility.

    Halving a saturated value is reported as undecided: the quotient would
    fall below the cap without being known exactly.
    """
    if m == 0:
        return a
    if isinstance(a, Saturated):
        if not a.parity_known:
            raise UndecidedAtCap("parity of a saturated exponent is unknown")
        if a.parity == 1:
            raise ValueError("odd value cannot be halved")
        raise UndecidedAtCap("halving a saturated exponent")
    if a.value % (1 << m):
        raise ValueError(f"{a.value} not divisible by 2^{m}")
    return Exact(a.value >> m)


def pow2(a: TowerInt, cap: int = DEFAULT_BIT_CAP) -> TowerInt:
    """``2**a`` for ``a >= 0``."""
    if isinstance(a, Saturated):
        if a.sign < 0:
            raise ValueError("negative exponent")
        return Saturated(1, max(cap, a.floor_bits), True, 0)
    if a.value < 0:
        raise ValueError("negative exponent")
    if a.value + 1 > cap:
        return Saturated(1, a.value, True, 0 if a.value > 0 else 1)
    return Exact(1 << a.value)


def tower(h: int, k: int, cap: int = DEFAULT_BIT_CAP) -> TowerInt:
    """``tower(0, k) = k``; ``tower(h, k) = 2 ** tower(h - 1, k)``."""
    if h < 0 or k < 0:
        raise ValueError("tower needs h >= 0 and k >= 0")
    value: TowerInt = exact(k, cap)
    for _ in range(h):
        value = pow2(value, cap)
    return value


def to_json(a: TowerInt):
    if isinstance(a, Exact):
        return str(a.value)
    return {"saturated": True, "sign": a.sign, "floor_bits": a.floor_bits,
            "parity": a.parity if a.parity_known else None}
