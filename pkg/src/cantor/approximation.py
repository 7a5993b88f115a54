"""Repetition witnesses, Padé-type approximants and the inequality checkers.

All inequalities are decided in log space with :mod:`cantor.logspace`, so the
enormous integers involved (``2^(2^(m!))`` and friends) are never built.  A
verdict over a finite index range is evidence for a hypothesis, never a proof
of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from sympy import primefactors

from .errors import (
    CapExceeded,
    DomainError,
    HypothesisViolated,
    NoWitness,
    SpecParseError,
    WitnessInvalid,
)
from .logspace import LogForm, compare
from .numeration import BINARY, cumulative_product
from .product_engine import (
    FACTORIAL_SUPPORT,
    CoeffRule,
    CoefficientStream,
    ProductSpec,
    evaluate,
    partial_product,
)
from .values import (
    BigPow,
    Interval,
    Value,
    divide,
    fraction_str,
    is_zero,
    materialize,
    max_bits,
    multiply,
    subtract,
)

THM21_FIRST = "THM21_FIRST"
THM21_SECOND = "THM21_SECOND"
COR22 = "COR22"
PROP23 = "PROP23"
PROP23_REMARK = "PROP23_REMARK"

LINEAR_FORM_NOTE = (
    "linear form evaluated as (x1 - x2) * f0(1/b) - x3, the left-hand side of the "
    "scaled approximation inequality; the written form 'x1 f0 + x2 f0 + x3' differs in signs"
)


@dataclass(frozen=True)
class RepetitionWitness:
    """``a_n(t + s) = ratio * a_n(t)`` with both coefficients nonzero."""

    n: int
    s: int
    t: int
    ratio: Value
    L: int

    @property
    def alpha(self) -> int:
        if isinstance(self.ratio, BigPow):
            return self.ratio.num.numerator
        return Fraction(self.ratio).numerator

    @property
    def beta(self) -> int:
        return Fraction(materialize(self.ratio)).denominator

    def alpha_log2(self) -> LogForm:
        return LogForm.of_int(self.alpha)

    def beta_log2(self) -> LogForm:
        if isinstance(self.ratio, BigPow):
            return (LogForm.of_int(self.ratio.num.denominator)
                    + LogForm.of_int(self.ratio.den_base, self.ratio.den_exp))
        return LogForm.of_int(self.beta)

    def to_json(self) -> dict:
        out = {"n": self.n, "s": self.s, "t": self.t, "L": self.L, "alpha": str(self.alpha)}
        if isinstance(self.ratio, BigPow):
            out["beta"] = {"num_den": str(self.ratio.num.denominator),
                           "base": self.ratio.den_base, "exp": str(self.ratio.den_exp)}
        else:
            out["beta"] = str(self.beta)
        return out


@dataclass(frozen=True)
class RationalApproximant:
    witness: RepetitionWitness
    p: tuple[Fraction, ...]
    C: int

    def p_at(self, x: Fraction) -> Fraction:
        return sum((c * x ** d for d, c in enumerate(self.p)), Fraction(0))

    def to_json(self) -> dict:
        return {"witness": self.witness.to_json(),
                "p": [fraction_str(c) for c in self.p], "C": str(self.C)}


def _require_rational(spec: ProductSpec) -> None:
    if not spec.is_rational:
        raise DomainError("approximants are defined for rational specs")


def make_witness(spec: ProductSpec, n: int, s: int, t: int, L: int) -> RepetitionWitness:
    """Witness for a given ``(s, t)``; the ratio is forced by the coefficients."""
    _require_rational(spec)
    if not (1 <= s <= L and t >= 0 and t + s <= L):
        raise WitnessInvalid(f"(s={s}, t={t}) outside the window L={L}")
    stream = CoefficientStream(spec, n)
    lo, hi = stream[t], stream[t + s]
    if is_zero(lo) or is_zero(hi):
        raise WitnessInvalid(f"a_{n}({t}) or a_{n}({t + s}) is zero")
    return RepetitionWitness(n, s, t, divide(hi, lo), L)


def find_repetition(spec: ProductSpec, n: int, L: int) -> RepetitionWitness:
    """Smallest ``t``, then smallest ``s``, with nonzero anchors in the window."""
    _require_rational(spec)
    if L < 1:
        raise ValueError("L must be >= 1")
    stream = CoefficientStream(spec, n)
    window = stream.prefix(L + 1)
    for t in range(L):
        if is_zero(window[t]):
            continue
        for s in range(1, L - t + 1):
            if not is_zero(window[t + s]):
                return RepetitionWitness(n, s, t, divide(window[t + s], window[t]), L)
    raise NoWitness(f"no pair of nonzero coefficients of f_{n} within L={L}")


def remainder_coefficients(spec: ProductSpec, w: RepetitionWitness,
                           p: Sequence[Value], upto: int) -> list[Value]:
    """Coefficients ``0..upto`` of ``(1 - ratio z^s) f_n(z) - p(z)``."""
    stream = CoefficientStream(spec, w.n)
    out = []
    for d in range(upto + 1):
        v = stream[d]
        if d >= w.s:
            v = subtract(v, multiply(w.ratio, stream[d - w.s]))
        if d < len(p):
            v = subtract(v, p[d])
        out.append(v)
    return out


def build_approximant(spec: ProductSpec, w: RepetitionWitness) -> RationalApproximant:
    _require_rational(spec)
    stream = CoefficientStream(spec, w.n)
    order = w.s + w.t
    p = []
    for d in range(order):
        v = stream[d]
        if d >= w.s:
            v = subtract(v, multiply(w.ratio, stream[d - w.s]))
        p.append(v)
    rem = remainder_coefficients(spec, w, p, order)
    for d, v in enumerate(rem):
        if not is_zero(v):
            raise WitnessInvalid(f"remainder coefficient {d} is {v}, expected 0")
    coeffs = tuple(materialize(v) for v in p)
    C = math.lcm(*(c.denominator for c in coeffs)) if coeffs else 1
    return RationalApproximant(w, coeffs, C)


# --- inequality reports -----------------------------------------------------


@dataclass
class InequalityRow:
    index: int
    lhs: LogForm | None
    rhs: LogForm
    holds: bool

    @property
    def lhs_log2(self) -> Fraction | None:
        return None if self.lhs is None else self.lhs.approx()

    @property
    def rhs_log2(self) -> Fraction:
        return self.rhs.approx()


@dataclass
class InequalityReport:
    variant: str
    epsilon: Fraction
    rows: list[InequalityRow]
    prime_set: list[int] | None = None
    evidence: dict = field(default_factory=dict)

    @property
    def summary(self) -> str:
        for row in self.rows:
            if not row.holds:
                return f"FIRST_FAILURE({row.index})"
        return "ALL_HOLD"

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.rows)

    def to_json(self) -> dict:
        rows = []
        for r in self.rows:
            rows.append({
                "n": r.index,
                "lhs_log2": None if r.lhs is None else fraction_str(r.lhs_log2),
                "rhs_log2": fraction_str(r.rhs_log2),
                "holds": r.holds,
            })
        evidence = dict(self.evidence)
        if self.prime_set is not None:
            evidence["prime_set"] = self.prime_set
        evidence["log2_precision"] = "row log2 values are dyadic approximations within 2^-60"
        return {"variant": self.variant, "epsilon": fraction_str(self.epsilon),
                "summary": self.summary, "rows": rows, "evidence": evidence}


def _smooth(form: LogForm, primes: Iterable[int]) -> bool:
    primes = list(primes)
    for k in form.terms:
        for p in primes:
            while k % p == 0:
                k //= p
        if k != 1:
            return False
    return True


def theorem21_sides(spec: ProductSpec, approx: RationalApproximant, b: int,
                    epsilon: Fraction, variant: str) -> tuple[LogForm, LogForm]:
    """``(log2 LHS, log2 RHS)`` of the chosen inequality at index ``n``."""
    w = approx.witness
    eps = Fraction(epsilon)
    one_plus = LogForm.of_one_plus(w.ratio)
    alpha = w.alpha_log2()
    beta = w.beta_log2()
    cb = LogForm.of_int(approx.C) + spec.denominator_product_log2(w.n)
    if variant == THM21_FIRST:
        lhs = one_plus + alpha.scale(1 + eps) + beta.scale(2 + eps) + cb.scale(3 + eps)
    elif variant == THM21_SECOND:
        lhs = one_plus + alpha.scale(eps) + (beta + cb).scale(1 + eps)
    elif variant == COR22:
        # specialised form for alpha = 1, without the unknown leading constant
        lhs = LogForm.of_int(2) + (beta + cb).scale(1 + eps)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    Qn = cumulative_product(spec.radix, w.n)
    rhs = LogForm.of_int(b, (1 - w.L * eps) * Qn)
    return lhs, rhs


def check_theorem21(spec: ProductSpec, b: int, epsilon, variant: str,
                    n_range: tuple[int, int], L: int = 1) -> InequalityReport:
    """Per-``n`` verdicts of the approximation inequality for ``n`` in ``[lo, hi]``."""
    _require_rational(spec)
    if b < 2:
        raise ValueError("b must be >= 2")
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    primes = spec.prime_set() if variant in (THM21_SECOND, COR22) else None
    rows, decay, within = [], [], []
    for n in range(n_range[0], n_range[1] + 1):
        w = find_repetition(spec, n, L)
        approx = build_approximant(spec, w)
        lhs, rhs = theorem21_sides(spec, approx, b, eps, variant)
        rows.append(InequalityRow(n, lhs, rhs, compare(lhs, rhs) < 0))
        Qn = cumulative_product(spec.radix, n)
        decay_form = LogForm.of_value(w.ratio) - LogForm.of_int(b, Qn)
        decay.append((n, decay_form.approx()))
        if primes is not None:
            family = w.alpha_log2() + w.beta_log2() + LogForm.of_int(approx.C)
            within.append({"n": n, "alpha_beta_C_over_prime_set": _smooth(family, primes)})
    values = [v for _, v in decay]
    evidence = {
        "witnesses": [find_repetition(spec, n, L).to_json()
                      for n in range(n_range[0], n_range[1] + 1)],
        "decay_log2": [{"n": n, "log2": fraction_str(v)} for n, v in decay],
        "decay_monotone": all(a > c for a, c in zip(values, values[1:])),
    }
    if within:
        evidence["prime_set_membership"] = within
    return InequalityReport(variant, eps, rows, primes, evidence)


def corollary22_spec(b0: int = 2) -> ProductSpec:
    """Binary product with ``c_y = b0^(2^y)`` at ``y = m!`` and ``c_y = 1`` elsewhere."""
    if b0 < 2:
        raise ValueError("b0 must be >= 2")
    return ProductSpec(BINARY, CoeffRule(FACTORIAL_SUPPORT, base=b0))


def check_corollary22(b: int, epsilon, n_range: tuple[int, int], b0: int = 2) -> InequalityReport:
    return check_theorem21(corollary22_spec(b0), b, epsilon, COR22, n_range)


# --- integer sequences for the dyadic-product check --------------------------


@dataclass(frozen=True)
class IntSequence:
    """Finitely described integer sequence.

    Kinds: ``constant`` (``value``), ``periodic`` (``values``), ``table``
    (``values`` then ``default``) and ``pow`` (``base^(mult * ratio^y)``).
    A plain callable can be wrapped with ``kind="callable"``; it has no
    inspectable prime set.
    """

    kind: str
    values: tuple[int, ...] = ()
    default: int | None = None
    base: int | None = None
    mult: int = 1
    ratio: int = 2
    func: Callable[[int], int] | None = None

    def value(self, y: int) -> int:
        if self.kind == "constant":
            return self.values[0]
        if self.kind == "periodic":
            return self.values[y % len(self.values)]
        if self.kind == "table":
            return self.values[y] if y < len(self.values) else self.default
        if self.kind == "pow":
            e = self.mult * self.ratio ** y
            bits = e * self.base.bit_length()
            if bits > max_bits():
                raise CapExceeded(f"{self.base}^{e} exceeds the materialization cap")
            return self.base ** e
        if self.kind == "callable":
            return self.func(y)
        raise SpecParseError(f"unknown sequence kind {self.kind!r}")

    def is_zero(self, y: int) -> bool:
        if self.kind == "pow":
            return self.base == 0
        return self.value(y) == 0

    def log2_abs(self, y: int) -> LogForm:
        if self.kind == "pow":
            return LogForm.of_int(self.base, self.mult * self.ratio ** y)
        return LogForm.of_int(self.value(y))

    def coprime_to(self, y: int, c: int) -> bool:
        if self.kind == "pow":
            return self.mult * self.ratio ** y == 0 or math.gcd(self.base, c) == 1
        return math.gcd(self.value(y), c) == 1

    def prime_set(self) -> list[int]:
        if self.kind == "callable":
            raise DomainError("prime set of an opaque sequence cannot be inspected")
        if self.kind == "pow":
            nums = [self.base]
        else:
            nums = list(self.values) + ([self.default] if self.default is not None else [])
        primes = set()
        for v in nums:
            if abs(v) > 1:
                primes.update(primefactors(abs(v)))
        return sorted(primes)

    @classmethod
    def from_json(cls, data) -> IntSequence:
        if not isinstance(data, dict) or "kind" not in data:
            raise SpecParseError("integer sequence must be an object with a 'kind'")
        kind = data["kind"]
        allowed = {"constant": {"value"}, "periodic": {"values"},
                   "table": {"values", "default"}, "pow": {"base", "mult", "ratio"}}.get(kind)
        if allowed is None:
            raise SpecParseError(f"unknown sequence kind {kind!r}")
        extra = set(data) - allowed - {"kind"}
        if extra:
            raise SpecParseError(f"unknown sequence keys {sorted(extra)}")
        try:
            if kind == "constant":
                return cls(kind, (int(data["value"]),))
            if kind == "periodic":
                return cls(kind, tuple(int(v) for v in data["values"]))
            if kind == "table":
                return cls(kind, tuple(int(v) for v in data["values"]), int(data["default"]))
            return cls(kind, base=int(data["base"]), mult=int(data.get("mult", 1)),
                       ratio=int(data.get("ratio", 2)))
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecParseError(f"bad integer sequence: {exc}") from exc


def check_prop23(f_rule: IntSequence, F_rule: IntSequence, b: int, c: int, epsilon,
                 variant: str, y_range: tuple[int, int]) -> InequalityReport:
    """Per-``y`` verdicts of ``|f_y/F_y| <= |F_0...F_{y-1}|^-(eps+k) b^(-eps 2^y)``.

    ``k`` is 2 in general and 1 when ``F`` has finitely many prime factors.
    """
    if not 2 <= c <= b:
        raise ValueError("need 2 <= c <= b")
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if variant == PROP23:
        k = 2
        primes = None
    elif variant == PROP23_REMARK:
        k = 1
        primes = F_rule.prime_set()
    else:
        raise ValueError(f"unknown variant {variant!r}")
    rows, coprime = [], []
    history = LogForm()
    for y in range(0, y_range[1] + 1):
        if F_rule.is_zero(y):
            raise HypothesisViolated(f"F_{y} = 0")
        logF = F_rule.log2_abs(y)
        f_zero = f_rule.is_zero(y)
        if not f_zero and compare(f_rule.log2_abs(y), logF) > 0:
            raise HypothesisViolated(f"|f_{y}| > |F_{y}|")
        if y >= y_range[0]:
            rhs = -(history.scale(eps + k) + LogForm.of_int(b, eps * 2 ** y))
            if f_zero:
                rows.append(InequalityRow(y, None, rhs, True))
            else:
                lhs = f_rule.log2_abs(y) - logF
                rows.append(InequalityRow(y, lhs, rhs, compare(lhs, rhs) <= 0))
            coprime.append({"y": y, "gcd_f_c_is_1": (not f_zero) and f_rule.coprime_to(y, c)})
        history = history + logF
    evidence = {"coprime_to_c": coprime, "c": c, "b": b}
    return InequalityReport(variant, eps, rows, primes, evidence)


# --- subspace-theorem triples -----------------------------------------------


@dataclass
class SchmidtTriple:
    n: int
    x1: int
    x2: int
    x3: int
    linear_form: Interval
    product_bound: Fraction

    @property
    def height(self) -> int:
        return max(abs(self.x1), abs(self.x2), abs(self.x3))

    @property
    def log2_linear_form(self) -> float | None:
        if self.linear_form.contains(0):
            return None
        top = self.linear_form.magnitude()
        return math.log2(top.numerator) - math.log2(top.denominator)

    @property
    def log2_height(self) -> float:
        return math.log2(self.height)

    @property
    def decay_ratio(self) -> float | None:
        lf = self.log2_linear_form
        if lf is None or self.height <= 1:
            return None
        return lf / self.log2_height

    def to_json(self) -> dict:
        return {"n": self.n, "x1": str(self.x1), "x2": str(self.x2), "x3": str(self.x3),
                "height": str(self.height), "linear_form": self.linear_form.to_json(),
                "product_bound": fraction_str(self.product_bound)}


def schmidt_triples(spec: ProductSpec, b: int, n_range: tuple[int, int],
                    L: int = 1) -> list[SchmidtTriple]:
    """Integer triples of the subspace-theorem argument for each ``n``."""
    _require_rational(spec)
    out = []
    for n in range(n_range[0], n_range[1] + 1):
        w = find_repetition(spec, n, L)
        approx = build_approximant(spec, w)
        Q = cumulative_product(spec.radix, n)
        B = 1
        for y in range(n):
            for s in range(1, spec.radix.q(y + 1)):
                B *= materialize(spec.c(s, y)).denominator
        alpha, beta, C = w.alpha, w.beta, approx.C
        common = C * B
        x1 = common * b ** ((w.s + w.t) * Q) * beta
        x2 = common * alpha * b ** (w.t * Q)
        x3_exact = (Fraction(x1) * partial_product(spec, b, n)
                    * approx.p_at(Fraction(1, b ** Q)))
        if x3_exact.denominator != 1:
            raise AssertionError(f"x3 is not an integer at n={n}")
        x3 = x3_exact.numerator
        coeff = x1 - x2
        height_bits = max(abs(x1), abs(x2), abs(x3), 1).bit_length()
        target = Fraction(1, (abs(coeff) + 1) * 2 ** (2 * height_bits + 64))
        f0 = evaluate(spec, b, target)
        linear = f0 * coeff - x3
        ratio = abs(materialize(w.ratio))
        bound = (1 + ratio) * Fraction(abs(C ** 3 * B ** 3 * beta ** 2 * alpha), b ** Q)
        out.append(SchmidtTriple(n, x1, x2, x3, linear, bound))
    return out
