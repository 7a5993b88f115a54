"""Exact comparisons between products of huge powers, done with logarithms.

A :class:`LogForm` stands for ``sum c_k * log2(k)`` over positive integers
``k`` with rational ``c_k``, plus an optional rational slack interval for the
few terms (``log2(1 + tiny)``) that have no finite symbolic form.  Two forms
are compared by first rewriting the difference over a pairwise coprime
basis, where it vanishes iff every coefficient does, and then bracketing the
remaining logarithms with dyadic bounds of increasing precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .errors import AmbiguousComparison
from .values import BigPow, Interval, Value, materialize

MAX_PRECISION = 1 << 16


def log2_bracket(x: int, bits: int) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= log2(x) <= hi`` with ``hi - lo <= 2**-bits`` (roughly).

    Uses the squaring digit-extraction of ``log2`` on the mantissa, once with
    every rounding done downward and once upward.
    """
    if x < 1:
        raise ValueError("log2_bracket needs a positive integer")
    e = x.bit_length() - 1
    if x == 1 << e:
        return Fraction(e), Fraction(e)
    w = bits + 16
    one = 1 << w
    two = one << 1
    if e >= w:
        lo_m = x >> (e - w)
        hi_m = -((-x) >> (e - w))
    else:
        lo_m = hi_m = x << (w - e)
    lo_bits = hi_bits = 0
    for _ in range(bits):
        lo_m = (lo_m * lo_m) >> w
        hi_m = -((-hi_m * hi_m) >> w)
        lo_bits <<= 1
        hi_bits <<= 1
        if lo_m >= two:
            lo_bits |= 1
            lo_m >>= 1
        if hi_m >= two:
            hi_bits |= 1
            hi_m = (hi_m + 1) >> 1
    scale = Fraction(1, 1 << bits)
    return e + lo_bits * scale, e + (hi_bits + 1) * scale


def coprime_basis(numbers) -> list[int]:
    """Pairwise coprime integers > 1 generating every input multiplicatively."""
    basis: list[int] = []
    todo = [n for n in numbers if n > 1]
    while todo:
        a = todo.pop()
        for i, b in enumerate(basis):
            g = gcd(a, b)
            if g > 1:
                del basis[i]
                todo.extend(v for v in (g, a // g, b // g) if v > 1)
                break
        else:
            basis.append(a)
    return sorted(basis)


def _valuation(n: int, p: int) -> tuple[int, int]:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k, n


@dataclass
class LogForm:
    terms: dict[int, Fraction] = field(default_factory=dict)
    slack: Interval = field(default_factory=lambda: Interval.point(0))

    @classmethod
    def zero(cls) -> LogForm:
        return cls()

    @classmethod
    def of_int(cls, n: int, coeff=1) -> LogForm:
        n = abs(n)
        if n == 0:
            raise ValueError("log of zero")
        if n == 1 or coeff == 0:
            return cls()
        return cls({n: Fraction(coeff)})

    @classmethod
    def of_rational(cls, x, coeff=1) -> LogForm:
        x = Fraction(x)
        return cls.of_int(x.numerator, coeff) + cls.of_int(x.denominator, -Fraction(coeff))

    @classmethod
    def of_value(cls, x: Value, coeff=1) -> LogForm:
        """``coeff * log2|x|`` without materializing symbolic powers."""
        if isinstance(x, BigPow):
            form = cls.of_rational(x.num, coeff)
            return form + cls.of_int(x.den_base, -Fraction(coeff) * x.den_exp)
        return cls.of_rational(materialize(x), coeff)

    @classmethod
    def of_one_plus(cls, x: Value) -> LogForm:
        """``log2(1 + |x|)``; tiny symbolic ``x`` goes into the slack."""
        if isinstance(x, BigPow):
            # log2(1+u) <= 2u, and u <= 2^(bit_length(num) - den_exp*floor(log2 base))
            floor_log = x.den_base.bit_length() - 1
            num = abs(x.num)
            top = num.numerator.bit_length() - (num.denominator.bit_length() - 1)
            k = min(x.den_exp * floor_log - top - 1, 1 << 14)
            return cls(slack=Interval(Fraction(0), Fraction(1, 2) ** k))
        return cls.of_rational(1 + abs(materialize(x)))

    def __add__(self, other: LogForm) -> LogForm:
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
            if terms[k] == 0:
                del terms[k]
        return LogForm(terms, self.slack + other.slack)

    def scale(self, c) -> LogForm:
        c = Fraction(c)
        if c == 0:
            return LogForm()
        return LogForm({k: v * c for k, v in self.terms.items()}, self.slack * c)

    def __neg__(self) -> LogForm:
        return self.scale(-1)

    def __sub__(self, other: LogForm) -> LogForm:
        return self + (-other)

    def canonical(self) -> LogForm:
        """Rewrite over a coprime basis; the exact part is then zero iff empty."""
        basis = coprime_basis(self.terms)
        out: dict[int, Fraction] = {}
        for k, c in self.terms.items():
            rest = k
            for b in basis:
                e, rest = _valuation(rest, b)
                if e:
                    out[b] = out.get(b, 0) + c * e
            assert rest == 1
        return LogForm({b: c for b, c in out.items() if c != 0}, self.slack)

    def is_exact_dyadic(self) -> bool:
        return all(k & (k - 1) == 0 for k in self.terms) and self.slack.width == 0

    def bracket(self, bits: int = 64) -> Interval:
        lo = hi = Fraction(0)
        for k, c in self.terms.items():
            # widen by the coefficient's size so the product stays near 2^-bits
            extra = abs(c).numerator.bit_length()
            a, b = log2_bracket(k, bits + extra)
            if c > 0:
                lo += c * a
                hi += c * b
            else:
                lo += c * b
                hi += c * a
        return Interval(lo, hi) + self.slack

    def sign(self) -> int:
        """Certified sign of the represented real number."""
        form = self.canonical()
        if not form.terms:
            if form.slack.lo > 0:
                return 1
            if form.slack.hi < 0:
                return -1
            if form.slack.width == 0:
                return 0
            raise AmbiguousComparison("slack interval straddles zero")
        bits = 64
        while bits <= MAX_PRECISION:
            iv = form.bracket(bits)
            if iv.lo > 0:
                return 1
            if iv.hi < 0:
                return -1
            bits *= 2
        raise AmbiguousComparison(f"undecided at {MAX_PRECISION} bits")

    def approx(self, bits: int = 64) -> Fraction:
        return self.bracket(bits).mid


def compare(lhs: LogForm, rhs: LogForm) -> int:
    """-1, 0 or 1 as ``lhs`` is below, equal to or above ``rhs``."""
    return (lhs - rhs).sign()
