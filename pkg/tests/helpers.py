"""Random spec generators and independent oracles shared by the tests."""

from __future__ import annotations

import random
from fractions import Fraction

from cantor.numeration import RadixSequence
from cantor.product_engine import CoeffRule, ProductSpec
from cantor.tm_words import TMSpec


def random_radix(rng: random.Random, qmax: int = 5, depth: int = 6) -> RadixSequence:
    kind = rng.choice(["constant", "periodic", "table"])
    if kind == "constant":
        return RadixSequence.constant(rng.randint(2, qmax))
    if kind == "periodic":
        return RadixSequence.periodic([rng.randint(2, qmax) for _ in range(rng.randint(1, 3))])
    return RadixSequence.table([rng.randint(2, qmax) for _ in range(rng.randint(0, depth))],
                               rng.randint(2, qmax))


def _rational(rng, positive=False, bound=9):
    num = rng.randint(1, bound) if positive else rng.randint(-bound, bound)
    return Fraction(num, rng.randint(1, bound))


def random_rational_spec(rng: random.Random, qmax: int = 5, depth: int = 6,
                         positive: bool = False) -> ProductSpec:
    radix = random_radix(rng, qmax, depth)
    rows = []
    for y in range(rng.randint(0, depth)):
        width = radix.q(y + 1) - 1
        rows.append(tuple(_rational(rng, positive) for _ in range(width)))
    default = _rational(rng, positive)
    return ProductSpec(radix, CoeffRule("table", rows=tuple(rows), default=default))


def random_unit_spec(rng: random.Random, L: int, qmax: int = 4, depth: int = 6) -> ProductSpec:
    radix = random_radix(rng, qmax, depth)
    rows = tuple(tuple(rng.randrange(L) for _ in range(radix.q(y + 1) - 1))
                 for y in range(rng.randint(0, depth)))
    return ProductSpec(radix, CoeffRule("table", rows=rows, default=rng.randrange(L)), L)


def random_tm_spec(rng: random.Random, Lmax: int = 6, qmax: int = 4, depth: int = 6) -> TMSpec:
    L = rng.randint(1, Lmax)
    radix = random_radix(rng, qmax, depth)
    kind = rng.choice(["constant", "periodic_y", "table"])
    row = lambda y: tuple(rng.randrange(L) for _ in range(rng.randint(1, 3)))  # noqa: E731
    if kind == "constant":
        rule = CoeffRule(kind, rows=(row(0),))
    elif kind == "periodic_y":
        rule = CoeffRule(kind, rows=tuple(row(y) for y in range(rng.randint(1, 3))))
    else:
        rule = CoeffRule(kind, rows=tuple(row(y) for y in range(rng.randint(0, depth))),
                         default=row(0))
    return TMSpec(L, radix, rule)


def digits_by_division(n: int, qs) -> dict[int, int]:
    """Oracle digit expansion; ``qs(j)`` gives ``q_j`` for ``j >= 1``."""
    out, y = {}, 0
    while n:
        n, s = divmod(n, qs(y + 1))
        if s:
            out[y] = s
        y += 1
    return out


def popcount_sign(m: int) -> int:
    return -1 if bin(m).count("1") % 2 else 1


def interval_log2_verdict(lhs_terms, rhs_terms, prec: int = 200, max_prec: int = 6400):
    """Independent ``lhs < rhs`` decision with mpmath interval logarithms.

    Each side is a list of ``(coeff, x)`` meaning ``coeff * log2(x)`` with ``x``
    a positive rational (``Fraction``) or an mpmath interval expression built
    by a callable ``ctx -> iv``.  Precision doubles while the sides overlap.
    """
    from mpmath import iv

    while prec <= max_prec:
        iv.prec = prec
        try:
            def side(terms):
                total = iv.mpf(0)
                for coeff, x in terms:
                    if callable(x):
                        val = x(iv)
                    else:
                        val = iv.mpf(x.numerator) / iv.mpf(x.denominator)
                    c = iv.mpf(coeff.numerator) / iv.mpf(coeff.denominator)
                    total += c * iv.log(val) / iv.log(iv.mpf(2))
                return total

            lo, hi = side(lhs_terms), side(rhs_terms)
            if lo.b < hi.a:
                return True
            if lo.a > hi.b:
                return False
            if lo.a == lo.b == hi.a == hi.b:
                return False
        finally:
            iv.prec = 53
        prec *= 2
    raise AssertionError("oracle could not separate the two sides")
