"""Mixed-radix numeration over a sequence ``q_0 = 1, q_1, q_2, ...``.

Every natural number has a unique expansion ``n = sum s_y * Q_y`` where
``Q_y = q_0 * q_1 * ... * q_y`` and ``0 <= s_y <= q_{y+1} - 1``.  Digits are
stored sparsely as ``(position, value)`` pairs because the interesting inputs
have their support spread over astronomically distant positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import DigitOutOfRange, SearchExhausted, SpecParseError

CONSTANT = "constant"
PERIODIC = "periodic"
TABLE = "table"


@dataclass(frozen=True)
class RadixSequence:
    """Finite description of an infinite radix sequence.

    ``qs`` lists ``q_1, q_2, ...``: for CONSTANT it has one entry, for
    PERIODIC it is repeated forever, for TABLE it is a prefix followed by
    ``default``.  ``q_0 = 1`` is implied.
    """

    kind: str
    qs: tuple[int, ...]
    default: int | None = None

    def __post_init__(self):
        if self.kind not in (CONSTANT, PERIODIC, TABLE):
            raise SpecParseError(f"unknown radix kind {self.kind!r}")
        if self.kind == CONSTANT and len(self.qs) != 1:
            raise SpecParseError("constant radix needs exactly one q")
        if self.kind == PERIODIC and not self.qs:
            raise SpecParseError("periodic radix needs a non-empty period")
        if self.kind == TABLE and self.default is None:
            raise SpecParseError("table radix needs a default")
        for q in self.qs + ((self.default,) if self.default is not None else ()):
            if not isinstance(q, int) or isinstance(q, bool) or q < 2:
                raise SpecParseError(f"radix entries must be integers >= 2, got {q!r}")

    @classmethod
    def constant(cls, q: int) -> RadixSequence:
        return cls(CONSTANT, (q,))

    @classmethod
    def periodic(cls, qs: Sequence[int]) -> RadixSequence:
        return cls(PERIODIC, tuple(qs))

    @classmethod
    def table(cls, qs: Sequence[int], default: int) -> RadixSequence:
        return cls(TABLE, tuple(qs), default)

    def q(self, j: int) -> int:
        if j < 0:
            raise ValueError("radix index must be >= 0")
        if j == 0:
            return 1
        if self.kind == CONSTANT:
            return self.qs[0]
        if self.kind == PERIODIC:
            return self.qs[(j - 1) % len(self.qs)]
        return self.qs[j - 1] if j - 1 < len(self.qs) else self.default

    def shift(self, n: int) -> RadixSequence:
        """Radix of the tail starting at position ``n``: ``q'_j = q_{n+j}``."""
        if n == 0 or self.kind == CONSTANT:
            return self
        if self.kind == PERIODIC:
            k = n % len(self.qs)
            return RadixSequence(PERIODIC, self.qs[k:] + self.qs[:k])
        return RadixSequence(TABLE, self.qs[n:], self.default)

    @property
    def prefix_length(self) -> int:
        """Number of leading ``q_j`` (j >= 1) before the rule becomes periodic."""
        return len(self.qs) if self.kind == TABLE else 0

    @property
    def period(self) -> int:
        return len(self.qs) if self.kind == PERIODIC else 1

    def to_json(self) -> dict:
        if self.kind == CONSTANT:
            return {"kind": CONSTANT, "q": self.qs[0]}
        if self.kind == PERIODIC:
            return {"kind": PERIODIC, "qs": list(self.qs)}
        return {"kind": TABLE, "qs": list(self.qs), "default": self.default}

    @classmethod
    def from_json(cls, data) -> RadixSequence:
        if not isinstance(data, dict) or "kind" not in data:
            raise SpecParseError("radix must be an object with a 'kind'")
        kind = data["kind"]
        allowed = {CONSTANT: {"kind", "q"}, PERIODIC: {"kind", "qs"},
                   TABLE: {"kind", "qs", "default"}}.get(kind)
        if allowed is None:
            raise SpecParseError(f"unknown radix kind {kind!r}")
        extra = set(data) - allowed
        if extra:
            raise SpecParseError(f"unknown radix keys {sorted(extra)}")
        try:
            if kind == CONSTANT:
                return cls.constant(data["q"])
            if kind == PERIODIC:
                return cls.periodic(data["qs"])
            return cls.table(data["qs"], data["default"])
        except (KeyError, TypeError) as exc:
            raise SpecParseError(f"bad radix: {exc}") from exc


BINARY = RadixSequence.constant(2)


@dataclass(frozen=True)
class DigitVector:
    """Sparse digits: strictly increasing positions, no explicit zeros."""

    digits: tuple[tuple[int, int], ...] = ()

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.digits)

    def __len__(self) -> int:
        return len(self.digits)

    def __getitem__(self, y: int) -> int:
        for pos, s in self.digits:
            if pos == y:
                return s
        return 0

    @property
    def lowest(self) -> int | None:
        """Smallest position carrying a nonzero digit."""
        return self.digits[0][0] if self.digits else None

    def to_json(self) -> list:
        return [[y, s] for y, s in self.digits]

    @classmethod
    def from_pairs(cls, pairs) -> DigitVector:
        cleaned = sorted((int(y), int(s)) for y, s in pairs if s != 0)
        for (a, _), (b, _) in zip(cleaned, cleaned[1:]):
            if a == b:
                raise SpecParseError(f"duplicate digit position {a}")
        return cls(tuple(cleaned))


def cumulative_products(radix: RadixSequence, n: int) -> list[int]:
    if n < 0:
        raise ValueError("n must be >= 0")
    out = [1]
    for y in range(1, n + 1):
        out.append(out[-1] * radix.q(y))
    return out


def cumulative_product(radix: RadixSequence, y: int) -> int:
    return cumulative_products(radix, y)[-1]


def to_digits(n: int, radix: RadixSequence) -> DigitVector:
    if n < 0:
        raise ValueError("only natural numbers have a representation")
    digits = []
    y = 0
    if radix.kind == CONSTANT and radix.qs[0] == 2:
        # binary: read the set bits directly
        while n:
            low = n & -n
            pos = low.bit_length() - 1
            digits.append((pos, 1))
            n ^= low
        return DigitVector(tuple(digits))
    while n:
        n, s = divmod(n, radix.q(y + 1))
        if s:
            digits.append((y, s))
        y += 1
    return DigitVector(tuple(digits))


def from_digits(d: DigitVector, radix: RadixSequence) -> int:
    total = 0
    weight = 1
    y = 0
    for pos, s in d:
        bound = radix.q(pos + 1) - 1
        if s < 0 or s > bound:
            raise DigitOutOfRange(f"digit {s} at position {pos} outside [0, {bound}]")
        while y < pos:
            y += 1
            weight *= radix.q(y)
        total += s * weight
    return total


def has_sparse_pattern(d: DigitVector, t: int) -> bool:
    """Lowest nonzero digit is 1 and the next ``t`` positions are zero."""
    if not d.digits or d.digits[0][1] != 1:
        return False
    y_min = d.digits[0][0]
    return len(d.digits) == 1 or d.digits[1][0] > y_min + t


def find_sparse_multiple(l: int, t: int, radix: RadixSequence, search_cap: int = 10**6) -> int:
    """Smallest ``x >= 1`` such that ``x*l`` has the sparse leading-digit pattern.

    Existence is guaranteed for every ``l`` and ``t``; the cap only guards
    against runaway searches.
    """
    if l < 1 or t < 0 or search_cap < 1:
        raise ValueError("need l >= 1, t >= 0, search_cap >= 1")
    for x in range(1, search_cap + 1):
        d = to_digits(x * l, radix)
        if has_sparse_pattern(d, t):
            # re-read through the general path before handing it out
            assert has_sparse_pattern(to_digits(from_digits(d, radix), radix), t)
            return x
    raise SearchExhausted(f"no multiple of {l} with pattern t={t} below x={search_cap}")
