"""Generalized Thue-Morse words of type ``(L, (q_n), (mu_n))``.

Letters are residues mod ``L``; residue ``j`` stands for the root of unity
``exp(2 pi i j / L)`` and the morphism ``f`` adds one to every residue.  The
words are built by

    A_0 = 0,   A_{n+1} = A_n f^{mu_n(1)}(A_n) ... f^{mu_n(q_{n+1}-1)}(A_n),

and the m-th letter of the limit is ``sum_y mu_y(s_y) mod L`` over the
mixed-radix digits of ``m``.  We write ``mu_y(s)`` throughout for the map the
construction indexes both as ``mu_n(s)`` and ``mu(s, y)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Mapping

from .errors import DepthTooLarge, DomainError, SpecParseError
from .numeration import BINARY, RadixSequence, cumulative_product, to_digits
from .product_engine import FACTORIAL_SUPPORT, CoeffRule, ProductSpec
from .values import Interval

DEFAULT_MAX_LETTERS = 1 << 24


@dataclass(frozen=True)
class TMSpec:
    L: int
    radix: RadixSequence
    mu_rule: CoeffRule

    def __post_init__(self):
        if not isinstance(self.L, int) or self.L < 1:
            raise SpecParseError("L must be an integer >= 1")
        if self.mu_rule.kind == FACTORIAL_SUPPORT:
            raise SpecParseError("mu must be a constant, periodic_y or table rule")
        for v in self.mu_rule.entries():
            if not isinstance(v, int) or isinstance(v, bool):
                raise SpecParseError(f"mu values must be integers, got {v!r}")

    def mu(self, s: int, y: int) -> int:
        return self.mu_rule.raw(s, y) % self.L

    def to_json(self) -> dict:
        return {"L": self.L, "radix": self.radix.to_json(), "mu": self.mu_rule.to_json(False)}

    @classmethod
    def from_json(cls, data) -> TMSpec:
        if not isinstance(data, dict):
            raise SpecParseError("TM spec must be a JSON object")
        extra = set(data) - {"L", "radix", "mu"}
        if extra:
            raise SpecParseError(f"unknown TM spec keys {sorted(extra)}")
        try:
            L = data["L"]
            radix = RadixSequence.from_json(data["radix"])
            rule = CoeffRule.from_json(data["mu"], rational=False)
        except KeyError as exc:
            raise SpecParseError(f"TM spec missing {exc}") from exc
        if isinstance(L, bool) or not isinstance(L, int):
            raise SpecParseError("L must be an integer")
        return cls(L, radix, rule)


def thue_morse_tm() -> TMSpec:
    return TMSpec(2, BINARY, CoeffRule("constant", rows=(1,)))


@dataclass(frozen=True)
class Word:
    letters: tuple[int, ...]
    L: int
    level: int | None = None

    def __len__(self) -> int:
        return len(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def to_text(self, block: int | None = None) -> str:
        if not block:
            return " ".join(map(str, self.letters)) + "\n"
        lines = []
        for i in range(0, len(self.letters), block):
            lines.append(" ".join(map(str, self.letters[i:i + block])))
        return "\n".join(lines) + "\n"


def morphism_apply(w: Word, j: int) -> Word:
    """``f^j``: shift every letter by ``j`` mod ``L``."""
    if j < 0:
        raise ValueError("j must be >= 0")
    j %= w.L
    if j == 0:
        return w
    return Word(tuple((x + j) % w.L for x in w.letters), w.L, w.level)


def build_word(spec: TMSpec, n: int, max_letters: int = DEFAULT_MAX_LETTERS) -> Word:
    """``A_n`` by the block recursion."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if cumulative_product(spec.radix, n) > max_letters:
        raise DepthTooLarge(f"A_{n} has more than {max_letters} letters")
    L = spec.L
    word = [0]
    for k in range(n):
        base = word
        word = list(base)
        for s in range(1, spec.radix.q(k + 1)):
            j = spec.mu(s, k)
            word.extend((x + j) % L for x in base)
    return Word(tuple(word), L, n)


def letter(spec: TMSpec, m: int) -> int:
    """Letter ``m`` of the limit word from the digits of ``m``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    return sum(spec.mu(s, y) for y, s in to_digits(m, spec.radix)) % spec.L


# --- ultimate periodicity ----------------------------------------------------


@dataclass(frozen=True)
class PeriodicityVerdict:
    """``FOUND`` (with offset ``A``), ``NONE_UP_TO`` (with ``depth``) or ``DECIDED_NONE``."""

    kind: str
    A: int | None = None
    depth: int | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.A is not None:
            out["A"] = self.A
        if self.depth is not None:
            out["depth"] = self.depth
        return out


def _structure(spec: TMSpec) -> tuple[int, int]:
    """``(y0, P)``: from index ``y0`` on, ``mu_k`` and ``q_{k+1}`` repeat with period ``P``."""
    y0 = max(spec.radix.prefix_length, spec.mu_rule.prefix_length)
    return y0, lcm(spec.radix.period, spec.mu_rule.period)


def criterion_holds(spec: TMSpec, A: int) -> bool:
    """Decide the congruence family for offset ``A`` over every ``y >= 0``.

    The check at index ``k = A + y`` depends only on the phase of ``k`` in the
    eventual period and on ``R = mu_A(1) * q_{A+1} ... q_{A+y} mod L``, so the
    scan stops as soon as that pair repeats.
    """
    L = spec.L
    y0, P = _structure(spec)
    R = spec.mu(1, A)
    seen = set()
    k = A
    while True:
        if k >= y0:
            state = ((k - y0) % P, R)
            if state in seen:
                return True
            seen.add(state)
        for s in range(1, spec.radix.q(k + 1)):
            if spec.mu(s, k) != (R * s) % L:
                return False
        R = (R * spec.radix.q(k + 1)) % L
        k += 1


def periodicity_witness(spec: TMSpec, depth: int) -> PeriodicityVerdict:
    """Search offsets ``A < depth`` satisfying the periodicity congruences.

    Offsets past ``y0 + P`` repeat the conditions of earlier ones, so when that
    bound fits below ``depth`` a failed search is a proof of aperiodicity.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    y0, P = _structure(spec)
    complete = y0 + P
    for A in range(min(depth, complete)):
        if criterion_holds(spec, A):
            return PeriodicityVerdict("FOUND", A=A)
    if complete <= depth:
        return PeriodicityVerdict("DECIDED_NONE")
    return PeriodicityVerdict("NONE_UP_TO", depth=depth)


def subsequence(spec: TMSpec, N: int, l: int, count: int) -> list[int]:
    return [letter(spec, N + i * l) for i in range(count)]


@dataclass(frozen=True)
class ScanResult:
    """``PERIODIC`` with ``preperiod``/``period``, or ``NO_PERIOD_UP_TO``."""

    kind: str
    preperiod: int | None = None
    period: int | None = None
    max_period: int | None = None
    horizon: int | None = None

    def to_json(self) -> dict:
        if self.kind == "PERIODIC":
            return {"kind": self.kind, "preperiod": self.preperiod, "period": self.period}
        return {"kind": self.kind, "max_period": self.max_period, "horizon": self.horizon}


def scan_periodicity(seq, max_period: int, horizon: int) -> ScanResult:
    """Smallest period ``<= max_period`` holding from some index ``<= horizon // 2``."""
    for p in range(1, max_period + 1):
        last_bad = -1
        for i in range(horizon - p - 1, -1, -1):
            if seq[i] != seq[i + p]:
                last_bad = i
                break
        pre = last_bad + 1
        if pre <= horizon // 2:
            return ScanResult("PERIODIC", preperiod=pre, period=p)
    return ScanResult("NO_PERIOD_UP_TO", max_period=max_period, horizon=horizon)


def subsequence_period_scan(spec: TMSpec, N: int, l: int, max_period: int,
                            horizon: int) -> ScanResult:
    if N < 0 or l < 1 or max_period < 1:
        raise ValueError("need N >= 0, l >= 1, max_period >= 1")
    if horizon < 2 * max_period:
        raise ValueError("horizon must be at least twice max_period")
    return scan_periodicity(subsequence(spec, N, l, horizon), max_period, horizon)


# --- subsequence values -------------------------------------------------------


@dataclass(frozen=True)
class CyclotomicInterval:
    """Enclosure of ``x + y*omega`` with ``omega^2 + omega + 1 = 0``."""

    one: Interval
    omega: Interval

    @property
    def width(self) -> Fraction:
        return max(self.one.width, self.omega.width)

    def contains_interval(self, other: CyclotomicInterval) -> bool:
        return self.one.contains_interval(other.one) and self.omega.contains_interval(other.omega)

    def to_json(self) -> dict:
        return {"basis": ["1", "omega"], "one": self.one.to_json(), "omega": self.omega.to_json()}


_CUBE_ROOTS = {0: (1, 0), 1: (0, 1), 2: (-1, -1)}


def _letter_values(spec: TMSpec, value_map: Mapping[int, Fraction] | None):
    """Per-residue coordinate vectors and a bound on each coordinate."""
    if value_map is not None:
        vals = {r: (Fraction(value_map[r]),) for r in range(spec.L)}
        return vals, max((abs(v[0]) for v in vals.values()), default=Fraction(0))
    if spec.L == 1:
        return {0: (Fraction(1),)}, Fraction(1)
    if spec.L == 2:
        return {0: (Fraction(1),), 1: (Fraction(-1),)}, Fraction(1)
    if spec.L == 3:
        return {r: tuple(map(Fraction, v)) for r, v in _CUBE_ROOTS.items()}, Fraction(1)
    raise DomainError("roots of unity of order > 3 need an explicit value_map")


def subsequence_interval(spec: TMSpec, N: int, l: int, b: int, k: int,
                         value_map: Mapping[int, Fraction] | None = None):
    """Enclosure of ``sum_n v(a(N + n l)) / b^(n+1)`` from its first ``k`` terms."""
    if b < 2 or l < 1 or N < 0 or k < 0:
        raise ValueError("need b >= 2, l >= 1, N >= 0, k >= 0")
    vals, bound = _letter_values(spec, value_map)
    dim = len(next(iter(vals.values())))
    sums = [Fraction(0)] * dim
    scale = Fraction(1)
    for i in range(k):
        scale /= b
        v = vals[letter(spec, N + i * l)]
        for d in range(dim):
            sums[d] += v[d] * scale
    tail = bound * scale / (b - 1)
    ivs = [Interval(s - tail, s + tail) for s in sums]
    return ivs[0] if dim == 1 else CyclotomicInterval(*ivs)


def subsequence_value(spec: TMSpec, N: int, l: int, b: int, target_abs_error,
                      value_map: Mapping[int, Fraction] | None = None):
    """Interval (or per-coordinate intervals for ``L = 3``) of width ``<= 2*target``."""
    target = Fraction(target_abs_error)
    if target <= 0:
        raise ValueError("target error must be positive")
    _, bound = _letter_values(spec, value_map)
    k = 0
    while bound / (Fraction(b) ** k * (b - 1)) > target:
        k += 1
    return subsequence_interval(spec, N, l, b, k, value_map)


# --- bridge to products -------------------------------------------------------


def to_product_spec(spec: TMSpec, rational: bool = False) -> ProductSpec:
    """Product whose ``z^m`` coefficient is the root of unity of letter ``m``.

    With ``rational=True`` (``L <= 2`` only) residues become the rationals
    ``+1``/``-1`` so the rational evaluator applies.
    """
    if not rational:
        return ProductSpec(spec.radix, spec.mu_rule, spec.L)
    if spec.L > 2:
        raise DomainError("rational bridge needs L <= 2")

    def conv(row):
        if isinstance(row, tuple):
            return tuple(Fraction(-1) if v % spec.L else Fraction(1) for v in row)
        return Fraction(-1) if row % spec.L else Fraction(1)

    r = spec.mu_rule
    rule = CoeffRule(r.kind, rows=tuple(conv(x) for x in r.rows),
                     default=None if r.default is None else conv(r.default))
    return ProductSpec(spec.radix, rule)
