"""Coefficient expansion of digit-indexed infinite products.

A product spec describes

    f_0(z) = prod_{y >= 0} (1 + sum_{s=1}^{q_{y+1}-1} c(s, y) * z^(s * Q_y))

and its tails ``f_n``, in which the first ``n`` factors are dropped and the
exponents are divided by ``Q_n``.  Because every integer has exactly one
mixed-radix expansion, the coefficient of ``z^m`` in ``f_n`` is the product of
``c(s_y, n + y)`` over the digits of ``m`` in the shifted radix.  The
polynomial-multiplication route (:func:`expand`) is kept as an independent
check on that digit formula.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from sympy import primefactors

from .errors import DomainError, SpecParseError, StructureViolation, ZeroFactor
from .logspace import LogForm
from .numeration import BINARY, RadixSequence, cumulative_product, to_digits
from .values import (
    BigPow,
    Interval,
    UnitRoot,
    Value,
    is_zero,
    make_bigpow,
    materialize,
    multiply,
    one_like,
    parse_fraction,
    value_to_json,
)

CONSTANT = "constant"
PERIODIC_Y = "periodic_y"
TABLE = "table"
FACTORIAL_SUPPORT = "factorial_support"

# A row gives the values for s = 1, 2, ...: a scalar means "same for every s",
# a tuple is indexed by s - 1 and cycled when the digit range is longer.
Row = Union[Fraction, int, tuple]


def _row_value(row: Row, s: int):
    if isinstance(row, tuple):
        return row[(s - 1) % len(row)]
    return row


def _row_entries(row: Row) -> tuple:
    return row if isinstance(row, tuple) else (row,)


def is_factorial(y: int) -> bool:
    """True when ``y = m!`` for some ``m >= 1``."""
    f, m = 1, 1
    while f < y:
        m += 1
        f *= m
    return f == y


@dataclass(frozen=True)
class CoeffRule:
    """Finite description of ``(s, y) -> value``.

    ``rows`` holds one row for CONSTANT, the repeating rows for PERIODIC_Y, and
    the leading rows for TABLE (``default`` then applies to every later y).
    FACTORIAL_SUPPORT uses ``base`` only: ``1 / base^(2^y)`` at factorial
    positions ``y``, 1 elsewhere.
    """

    kind: str
    rows: tuple = ()
    default: Row | None = None
    base: int | None = None

    def __post_init__(self):
        if self.kind == FACTORIAL_SUPPORT:
            if not isinstance(self.base, int) or self.base < 2:
                raise SpecParseError("factorial_support needs an integer base >= 2")
        elif self.kind in (CONSTANT, PERIODIC_Y):
            if not self.rows:
                raise SpecParseError(f"{self.kind} rule needs at least one row")
        elif self.kind == TABLE:
            if self.default is None:
                raise SpecParseError("table rule needs a default row")
        else:
            raise SpecParseError(f"unknown coefficient rule {self.kind!r}")
        for row in self.all_rows():
            if isinstance(row, tuple) and not row:
                raise SpecParseError("empty coefficient row")

    def row(self, y: int) -> Row:
        if self.kind == CONSTANT:
            return self.rows[0]
        if self.kind == PERIODIC_Y:
            return self.rows[y % len(self.rows)]
        return self.rows[y] if y < len(self.rows) else self.default

    def raw(self, s: int, y: int):
        if self.kind == FACTORIAL_SUPPORT:
            if is_factorial(y):
                return make_bigpow(1, self.base, 1 << y)
            return Fraction(1)
        return _row_value(self.row(y), s)

    def all_rows(self) -> list:
        if self.kind == FACTORIAL_SUPPORT:
            return []
        return list(self.rows) + ([self.default] if self.default is not None else [])

    def entries(self) -> list:
        return [v for row in self.all_rows() for v in _row_entries(row)]

    @property
    def prefix_length(self) -> int:
        return len(self.rows) if self.kind == TABLE else 0

    @property
    def period(self) -> int:
        return len(self.rows) if self.kind == PERIODIC_Y else 1

    def to_json(self, rational: bool) -> dict:
        def enc(row):
            conv = (lambda v: value_to_json(Fraction(v))) if rational else int
            if isinstance(row, tuple):
                return [conv(v) for v in row]
            return conv(row)

        if self.kind == FACTORIAL_SUPPORT:
            return {"kind": FACTORIAL_SUPPORT, "base": self.base}
        if self.kind == CONSTANT:
            return {"kind": CONSTANT, "value": enc(self.rows[0])}
        if self.kind == PERIODIC_Y:
            return {"kind": PERIODIC_Y, "rows": [enc(r) for r in self.rows]}
        return {"kind": TABLE, "rows": [enc(r) for r in self.rows], "default": enc(self.default)}

    @classmethod
    def from_json(cls, data, rational: bool) -> CoeffRule:
        if not isinstance(data, dict) or "kind" not in data:
            raise SpecParseError("coefficient rule must be an object with a 'kind'")
        kind = data["kind"]
        allowed = {CONSTANT: {"value"}, PERIODIC_Y: {"rows"}, TABLE: {"rows", "default"},
                   FACTORIAL_SUPPORT: {"base"}}.get(kind)
        if allowed is None:
            raise SpecParseError(f"unknown coefficient rule {kind!r}")
        extra = set(data) - allowed - {"kind"}
        if extra:
            raise SpecParseError(f"unknown coefficient keys {sorted(extra)}")

        def dec(v):
            try:
                if rational:
                    return parse_fraction(v)
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ValueError(v)
                return v
            except (ValueError, ZeroDivisionError) as exc:
                raise SpecParseError(f"bad coefficient value {v!r}") from exc

        def row(r):
            if isinstance(r, list):
                return tuple(dec(v) for v in r)
            return dec(r)

        try:
            if kind == FACTORIAL_SUPPORT:
                return cls(kind, base=data["base"])
            if kind == CONSTANT:
                return cls(kind, rows=(row(data["value"]),))
            if kind == PERIODIC_Y:
                return cls(kind, rows=tuple(row(r) for r in data["rows"]))
            return cls(kind, rows=tuple(row(r) for r in data["rows"]), default=row(data["default"]))
        except KeyError as exc:
            raise SpecParseError(f"coefficient rule missing {exc}") from exc


@dataclass(frozen=True)
class ProductSpec:
    """``radix`` plus coefficient rule; ``unit_order`` is L for root-of-unity specs."""

    radix: RadixSequence
    rule: CoeffRule
    unit_order: int | None = None

    def __post_init__(self):
        if self.unit_order is not None:
            if self.unit_order < 1:
                raise SpecParseError("L must be >= 1")
            if self.rule.kind == FACTORIAL_SUPPORT:
                raise SpecParseError("factorial_support is a rational rule")

    @property
    def is_rational(self) -> bool:
        return self.unit_order is None

    def c(self, s: int, y: int) -> Value:
        raw = self.rule.raw(s, y)
        if self.unit_order is not None:
            return UnitRoot(raw, self.unit_order)
        return raw if isinstance(raw, BigPow) else Fraction(raw)

    def one(self) -> Value:
        return one_like(self.unit_order)

    def factor_terms(self, y: int) -> list[tuple[int, Value]]:
        """Nonzero ``(s, c(s, y))`` pairs of factor ``y``."""
        terms = []
        for s in range(1, self.radix.q(y + 1)):
            v = self.c(s, y)
            if not is_zero(v):
                terms.append((s, v))
        return terms

    def magnitude_bound(self, n: int = 0) -> Fraction:
        """Rule-level bound on ``|c(s, y)|`` for all ``y >= n``."""
        if self.unit_order is not None or self.rule.kind == FACTORIAL_SUPPORT:
            return Fraction(1)
        if self.rule.kind == TABLE:
            rows = list(self.rule.rows[n:]) + [self.rule.default]
        else:
            rows = self.rule.all_rows()
        return max(abs(Fraction(v)) for r in rows for v in _row_entries(r))

    def denominator_log2(self, s: int, y: int) -> LogForm:
        """``log2 b_{s,y}`` with ``b_{s,y}`` the reduced denominator of ``c(s, y)``."""
        v = self.c(s, y)
        if isinstance(v, BigPow):
            return (LogForm.of_int(v.num.denominator)
                    + LogForm.of_int(v.den_base, v.den_exp))
        return LogForm.of_int(materialize(v).denominator)

    def denominator_product_log2(self, n: int) -> LogForm:
        """``log2`` of ``prod_{y<n} prod_s b_{s,y}``."""
        total = LogForm()
        for y in range(n):
            for s in range(1, self.radix.q(y + 1)):
                total = total + self.denominator_log2(s, y)
        return total

    def prime_set(self) -> list[int]:
        """Primes dividing any numerator or denominator the rule can produce."""
        if self.unit_order is not None:
            raise DomainError("prime sets are defined for rational specs only")
        if self.rule.kind == FACTORIAL_SUPPORT:
            return sorted(primefactors(self.rule.base))
        primes = set()
        for v in self.rule.entries():
            v = Fraction(v)
            for part in (abs(v.numerator), v.denominator):
                if part > 1:
                    primes.update(primefactors(part))
        return sorted(primes)

    def to_json(self) -> dict:
        out = {"radix": self.radix.to_json(),
               "domain": "rational" if self.is_rational else "unit_root",
               "coeffs": self.rule.to_json(self.is_rational)}
        if not self.is_rational:
            out["L"] = self.unit_order
        return out

    @classmethod
    def from_json(cls, data) -> ProductSpec:
        if not isinstance(data, dict):
            raise SpecParseError("product spec must be a JSON object")
        extra = set(data) - {"radix", "domain", "L", "coeffs"}
        if extra:
            raise SpecParseError(f"unknown product spec keys {sorted(extra)}")
        domain = data.get("domain", "rational")
        if domain not in ("rational", "unit_root"):
            raise SpecParseError(f"unknown domain {domain!r}")
        if "radix" not in data or "coeffs" not in data:
            raise SpecParseError("product spec needs 'radix' and 'coeffs'")
        radix = RadixSequence.from_json(data["radix"])
        rational = domain == "rational"
        order = None
        if not rational:
            order = data.get("L")
            if not isinstance(order, int) or isinstance(order, bool):
                raise SpecParseError("unit_root domain needs integer 'L'")
        elif "L" in data:
            raise SpecParseError("'L' only applies to the unit_root domain")
        return cls(radix, CoeffRule.from_json(data["coeffs"], rational), order)


def all_ones_spec(radix: RadixSequence = BINARY) -> ProductSpec:
    """Every coefficient 1: the product telescopes to ``1 / (1 - z)``."""
    return ProductSpec(radix, CoeffRule(CONSTANT, rows=(Fraction(1),)))


def thue_morse_spec() -> ProductSpec:
    """``prod (1 - z^(2^y))``, whose coefficients are the +-1 Thue-Morse signs."""
    return ProductSpec(BINARY, CoeffRule(CONSTANT, rows=(Fraction(-1),)))


def coefficient(spec: ProductSpec, n: int, m: int) -> Value:
    """Coefficient of ``z^m`` in the tail product ``f_n``, via the digits of ``m``."""
    if m < 0 or n < 0:
        raise ValueError("n and m must be >= 0")
    value = spec.one()
    for y, s in to_digits(m, spec.radix.shift(n)):
        value = multiply(value, spec.c(s, n + y))
        if is_zero(value):
            return Fraction(0)
    return value


class CoefficientStream:
    """Cached coefficients ``a_n(0), a_n(1), ...`` of one tail product.

    Reads of already computed entries never block each other; extension takes
    a lock.
    """

    def __init__(self, spec: ProductSpec, n: int = 0):
        self.spec = spec
        self.n = n
        self._cache: list[Value] = []
        self._lock = threading.Lock()

    def __getitem__(self, m: int) -> Value:
        if m < len(self._cache):
            return self._cache[m]
        if m > len(self._cache) + 4096:
            # far-away single reads do not extend the prefix
            return coefficient(self.spec, self.n, m)
        self.extend(m + 1)
        return self._cache[m]

    def extend(self, length: int) -> None:
        with self._lock:
            while len(self._cache) < length:
                self._cache.append(coefficient(self.spec, self.n, len(self._cache)))

    def prefix(self, length: int) -> list[Value]:
        self.extend(length)
        return self._cache[:length]


# --- polynomial-multiplication oracle -------------------------------------


def _tail_weights(spec: ProductSpec, n: int, N: int):
    """Yield ``(y, Q_y / Q_n)`` for the factors that touch degrees below N."""
    shifted = spec.radix.shift(n)
    weight, k = 1, 0
    while weight < N:
        yield n + k, weight
        k += 1
        weight *= shifted.q(k)


def expand(spec: ProductSpec, n: int, N: int) -> list[Value]:
    """First ``N`` coefficients of ``f_n`` by truncated polynomial products."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if spec.unit_order is not None:
        return _expand_unit(spec, n, N)
    poly = [Fraction(0)] * N
    poly[0] = Fraction(1)
    top = 0
    for y, weight in _tail_weights(spec, n, N):
        terms = [(s * weight, materialize(v)) for s, v in spec.factor_terms(y)]
        new = list(poly)
        for shift, v in terms:
            for i in range(min(top + 1, N - shift)):
                if poly[i]:
                    new[i + shift] += v * poly[i]
        top = min(N - 1, top + (spec.radix.q(y + 1) - 1) * weight)
        poly = new
    return poly


def _expand_unit(spec: ProductSpec, n: int, N: int) -> list[Value]:
    # coefficients live in Z[zeta_L], stored as integer vectors over zeta^k
    L = spec.unit_order
    poly = [[0] * L for _ in range(N)]
    poly[0][0] = 1
    for y, weight in _tail_weights(spec, n, N):
        terms = [(s * weight, v.residue) for s, v in spec.factor_terms(y)]
        new = [list(vec) for vec in poly]
        for shift, r in terms:
            for i in range(N - shift):
                vec = poly[i]
                if any(vec):
                    target = new[i + shift]
                    for k in range(L):
                        target[(k + r) % L] += vec[k]
        poly = new
    out = []
    for m, vec in enumerate(poly):
        nonzero = [k for k in range(L) if vec[k]]
        if len(nonzero) != 1 or vec[nonzero[0]] != 1:
            raise AssertionError(f"coefficient {m} is not a single root of unity: {vec}")
        out.append(UnitRoot(nonzero[0], L))
    return out


# --- block structure ------------------------------------------------------


def copy_structure(spec: ProductSpec, n: int, num_blocks: int) -> list[Value]:
    """Scalars ``f_l`` with block ``l`` of length ``Q_n`` equal to ``f_l * A_n``.

    The data come from :func:`expand`, so a violation points at a real
    inconsistency rather than at the digit formula agreeing with itself.
    """
    if n < 0 or num_blocks < 1:
        raise ValueError("need n >= 0 and num_blocks >= 1")
    width = cumulative_product(spec.radix, n)
    seq = expand(spec, 0, width * num_blocks)
    head = seq[:width]
    scalars = []
    for l in range(num_blocks):
        block = seq[l * width:(l + 1) * width]
        scalar = block[0]
        for i, (a, b) in enumerate(zip(head, block)):
            if multiply(scalar, a) != b:
                raise StructureViolation(l * width + i)
        scalars.append(scalar)
    return scalars


# --- special values ---------------------------------------------------------


def _factor_at(spec: ProductSpec, y: int, x: Fraction, Qy: int) -> Fraction:
    total = Fraction(1)
    for s, v in spec.factor_terms(y):
        total += materialize(v) * x ** (s * Qy)
    return total


def partial_product(spec: ProductSpec, b: int, n: int) -> Fraction:
    """``prod_{y<n}`` of the factors at ``z = 1/b``, exactly."""
    x = Fraction(1, b)
    value = Fraction(1)
    Q = 1
    for y in range(n):
        f = _factor_at(spec, y, x, Q)
        if f == 0:
            raise ZeroFactor(f"factor y={y} vanishes at z=1/{b}")
        value *= f
        Q *= spec.radix.q(y + 1)
    return value


def tail_bound(spec: ProductSpec, b: int, n: int) -> Fraction:
    """``S_n >= sum_{y>=n} sum_s |c(s,y)| b^(-s Q_y)``.

    With ``M`` bounding the coefficients, each factor contributes at most
    ``2 M b^-Q_y`` and ``Q_y >= Q_n + (y - n)`` makes the sum over ``y`` at most
    twice its first term, so ``S_n = 4 M b^-Q_n``.
    """
    Qn = cumulative_product(spec.radix, n)
    return 4 * spec.magnitude_bound(n) / Fraction(b) ** Qn


def evaluation_interval(spec: ProductSpec, b: int, n: int) -> Interval | None:
    """Enclosure of ``f_0(1/b)`` from the first ``n`` factors; None while ``S_n >= 1``."""
    if not spec.is_rational:
        raise DomainError("evaluate works on rational specs")
    if b < 2:
        raise ValueError("base must be >= 2")
    S = tail_bound(spec, b, n)
    P = partial_product(spec, b, n)
    if S >= 1:
        return None
    return Interval.point(P) * Interval(1 - S, 1 / (1 - S))


def evaluate(spec: ProductSpec, b: int, target_abs_error, max_depth: int = 64) -> Interval:
    """Interval of width at most ``2 * target_abs_error`` around ``f_0(1/b)``."""
    target = Fraction(target_abs_error)
    if target <= 0:
        raise ValueError("target error must be positive")
    for n in range(max_depth + 1):
        iv = evaluation_interval(spec, b, n)
        if iv is not None and iv.width <= 2 * target:
            return iv
    raise ValueError(f"target not reached within {max_depth} factors")


# --- condition on tail coefficient growth -----------------------------------


@dataclass
class BoundednessReport:
    sup_ratio: Fraction
    argmax: tuple[int, int]
    incomparable: list[tuple[int, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"sup_ratio": value_to_json(self.sup_ratio),
                "argmax": {"n": self.argmax[0], "m": self.argmax[1]},
                "incomparable": [{"n": n, "m": m} for n, m in self.incomparable]}


def _abs(v: Value) -> Fraction:
    if isinstance(v, UnitRoot):
        return Fraction(1)
    return abs(materialize(v))


def boundedness_report(spec: ProductSpec, n_max: int, m_max: int) -> BoundednessReport:
    """Empirical ``max |a_n(m)| / |a_0(m)|``; a lower bound for the constant C only."""
    base = CoefficientStream(spec, 0).prefix(m_max + 1)
    best, arg = Fraction(0), (0, 0)
    bad = []
    for n in range(n_max + 1):
        tail = CoefficientStream(spec, n).prefix(m_max + 1)
        for m in range(m_max + 1):
            num, den = _abs(tail[m]), _abs(base[m])
            if den == 0:
                if num != 0:
                    bad.append((n, m))
                continue
            r = num / den
            if r > best:
                best, arg = r, (n, m)
    return BoundednessReport(best, arg, bad)
