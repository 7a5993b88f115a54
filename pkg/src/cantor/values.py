"""Exact coefficient values.

Three kinds of value flow through the engine:

* ``Fraction`` for ordinary rationals,
* ``BigPow`` for ``num / den_base**den_exp`` when the denominator is too large
  to hold in memory (``den_exp`` itself may be enormous),
* ``UnitRoot`` for ``exp(2*pi*i*residue/order)``.

Rational and unit-root values never meet in one product spec.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import CapExceeded, DomainError

DEFAULT_MAX_BITS = 2**20


def max_bits() -> int:
    """Largest denominator, in bits, that may be materialized exactly."""
    raw = os.environ.get("CANTOR_MAX_BITS")
    return int(raw) if raw else DEFAULT_MAX_BITS


def _log2_upper(base: int) -> int:
    # exact for powers of two, otherwise rounded up
    e = base.bit_length() - 1
    return e if base == 1 << e else e + 1


@dataclass(frozen=True)
class BigPow:
    num: Fraction
    den_base: int
    den_exp: int

    def denominator_bits(self) -> int:
        return self.den_exp * _log2_upper(self.den_base)

    def materialize(self) -> Fraction:
        if self.denominator_bits() > max_bits():
            raise CapExceeded(
                f"{self.den_base}^{self.den_exp} exceeds the {max_bits()}-bit cap")
        return self.num / Fraction(self.den_base) ** self.den_exp

    def __neg__(self) -> BigPow:
        return BigPow(-self.num, self.den_base, self.den_exp)


@dataclass(frozen=True)
class UnitRoot:
    residue: int
    order: int

    def __post_init__(self):
        object.__setattr__(self, "residue", self.residue % self.order)

    def __mul__(self, other: UnitRoot) -> UnitRoot:
        if not isinstance(other, UnitRoot) or other.order != self.order:
            return NotImplemented
        return UnitRoot(self.residue + other.residue, self.order)

    def to_fraction(self) -> Fraction:
        """Real value, available only for orders 1 and 2."""
        if self.order == 1 or self.residue == 0:
            return Fraction(1)
        if self.order == 2:
            return Fraction(-1)
        raise DomainError(f"root of unity of order {self.order} is not rational")


Value = Union[Fraction, BigPow, UnitRoot]


def make_bigpow(num, den_base: int, den_exp: int) -> Value:
    """Normalize: materialize when small enough, else keep symbolic."""
    num = Fraction(num)
    if num == 0 or den_exp == 0:
        return num
    bp = BigPow(num, den_base, den_exp)
    if bp.denominator_bits() <= max_bits():
        return bp.materialize()
    return bp


def multiply(x: Value, y: Value) -> Value:
    if isinstance(x, UnitRoot) or isinstance(y, UnitRoot):
        if isinstance(x, UnitRoot) and isinstance(y, UnitRoot):
            return x * y
        raise DomainError("cannot mix unit roots with rationals")
    if isinstance(x, BigPow) and isinstance(y, BigPow):
        if x.den_base != y.den_base:
            raise CapExceeded("product of symbolic powers with different bases")
        return make_bigpow(x.num * y.num, x.den_base, x.den_exp + y.den_exp)
    if isinstance(x, BigPow):
        return make_bigpow(x.num * y, x.den_base, x.den_exp)
    if isinstance(y, BigPow):
        return make_bigpow(y.num * x, y.den_base, y.den_exp)
    return x * y


def subtract(x: Value, y: Value) -> Value:
    if isinstance(x, BigPow) or isinstance(y, BigPow):
        if is_zero(y):
            return x
        if is_zero(x):
            return -y
        if (isinstance(x, BigPow) and isinstance(y, BigPow)
                and (x.den_base, x.den_exp) == (y.den_base, y.den_exp)):
            return make_bigpow(x.num - y.num, x.den_base, x.den_exp)
        return materialize(x) - materialize(y)
    if isinstance(x, UnitRoot) or isinstance(y, UnitRoot):
        raise DomainError("unit roots do not support subtraction")
    return x - y


def divide(x: Value, y: Value) -> Value:
    if is_zero(y):
        raise ZeroDivisionError("division by a zero coefficient")
    if isinstance(x, UnitRoot) and isinstance(y, UnitRoot):
        return x * UnitRoot(-y.residue, y.order)
    if isinstance(y, BigPow):
        # 1 / (num / base^e) = base^e / num
        if isinstance(x, BigPow) and x.den_base == y.den_base:
            inv = x.num / y.num
            if x.den_exp >= y.den_exp:
                return make_bigpow(inv, x.den_base, x.den_exp - y.den_exp)
            return inv * Fraction(x.den_base) ** (y.den_exp - x.den_exp)
        return materialize(x) / y.materialize()
    if isinstance(x, BigPow):
        return make_bigpow(x.num / y, x.den_base, x.den_exp)
    return Fraction(x) / y


def is_zero(x: Value) -> bool:
    if isinstance(x, UnitRoot):
        return False
    if isinstance(x, BigPow):
        return x.num == 0
    return x == 0


def materialize(x: Value) -> Fraction:
    if isinstance(x, BigPow):
        return x.materialize()
    if isinstance(x, UnitRoot):
        return x.to_fraction()
    return Fraction(x)


def one_like(domain_order: int | None) -> Value:
    return UnitRoot(0, domain_order) if domain_order else Fraction(1)


def value_to_json(x: Value):
    if isinstance(x, UnitRoot):
        return {"residue": x.residue, "L": x.order}
    if isinstance(x, BigPow):
        return {"num": str(x.num), "den_base": x.den_base, "den_exp": str(x.den_exp)}
    return fraction_str(x)


def fraction_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_fraction(text) -> Fraction:
    if isinstance(text, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, str):
        return Fraction(text.strip())
    raise ValueError(f"cannot read {text!r} as an exact rational")


@dataclass(frozen=True)
class Interval:
    """Closed interval of rationals."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> Interval:
        return cls(Fraction(x), Fraction(x))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: Interval) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: Interval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def magnitude(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))

    def __add__(self, other) -> Interval:
        if isinstance(other, Interval):
            return Interval(self.lo + other.lo, self.hi + other.hi)
        return Interval(self.lo + other, self.hi + other)

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> Interval:
        return self + (-other if isinstance(other, Interval) else -Fraction(other))

    def __mul__(self, other) -> Interval:
        if isinstance(other, Interval):
            ends = [a * b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
            return Interval(min(ends), max(ends))
        other = Fraction(other)
        a, b = self.lo * other, self.hi * other
        return Interval(min(a, b), max(a, b))

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"lo": fraction_str(self.lo), "hi": fraction_str(self.hi)}
