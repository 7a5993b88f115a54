from __future__ import annotations

import random
import threading
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantor import product_engine
from cantor.approximation import corollary22_spec
from cantor.errors import CapExceeded, SpecParseError, StructureViolation, ZeroFactor
from cantor.numeration import BINARY, RadixSequence, cumulative_product
from cantor.product_engine import (
    CoeffRule,
    CoefficientStream,
    ProductSpec,
    all_ones_spec,
    boundedness_report,
    coefficient,
    copy_structure,
    evaluate,
    evaluation_interval,
    expand,
    thue_morse_spec,
)
from cantor.values import BigPow, UnitRoot, materialize
from helpers import popcount_sign, random_rational_spec, random_unit_spec

PERIODIC_35 = RadixSequence.periodic([3, 5])


def test_all_ones_binary_coefficients():
    spec = all_ones_spec()
    assert expand(spec, 0, 16) == [1] * 16
    assert all(coefficient(spec, 0, m) == 1 for m in (0, 1, 12345, 2**70 + 3))


def test_thue_morse_examples():
    spec = thue_morse_spec()
    assert coefficient(spec, 0, 3) == 1
    assert coefficient(spec, 0, 1) == -1
    assert expand(spec, 0, 8) == [1, -1, -1, 1, -1, 1, 1, -1]
    assert [coefficient(spec, 0, m) for m in range(1024)] == [
        popcount_sign(m) for m in range(1024)]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_every_spec_starts_with_one(seed):
    spec = random_rational_spec(random.Random(seed))
    n = seed % 4
    assert expand(spec, n, 1) == [1]
    assert coefficient(spec, n, 0) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_coefficient_matches_expand_oracle(seed):
    rng = random.Random(seed)
    spec = random_rational_spec(rng)
    n = rng.randint(0, 3)
    N = 200
    oracle = expand(spec, n, N)
    assert [coefficient(spec, n, m) for m in range(N)] == oracle


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6))
def test_unit_root_coefficients_match_oracle(seed, L):
    rng = random.Random(seed)
    spec = random_unit_spec(rng, L)
    n = rng.randint(0, 2)
    oracle = expand(spec, n, 150)
    values = [coefficient(spec, n, m) for m in range(150)]
    assert values == oracle
    # products of roots of unity stay on the unit circle
    assert all(isinstance(v, UnitRoot) and v.order == L for v in values)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_prefix_stability(seed):
    spec = random_rational_spec(random.Random(seed))
    short = expand(spec, 0, 40)
    long = expand(spec, 0, 300)
    assert long[:40] == short
    stream = CoefficientStream(spec, 0)
    first = stream.prefix(40)
    stream.prefix(300)
    assert stream.prefix(40) == first


def test_stream_concurrent_reads():
    spec = random_rational_spec(random.Random(3))
    stream = CoefficientStream(spec, 1)
    expected = expand(spec, 1, 500)
    errors = []

    def reader(k):
        try:
            for m in range(k, 500, 7):
                assert stream[m] == expected[m]
        except AssertionError as exc:  # pragma: no cover - only on failure
            errors.append(exc)

    threads = [threading.Thread(target=reader, args=(k,)) for k in range(7)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors


@pytest.mark.parametrize("radix", [BINARY, PERIODIC_35, RadixSequence.table([2, 3], 4)],
                         ids=["binary", "periodic35", "table234"])
def test_telescoping_identity(radix):
    spec = all_ones_spec(radix)
    assert expand(spec, 0, 600) == [1] * 600
    for b in (2, 3, 7):
        assert evaluate(spec, b, Fraction(1, 10**25)).contains(Fraction(b, b - 1))


def test_copy_structure_examples():
    assert copy_structure(all_ones_spec(), 2, 8) == [1] * 8
    tm = thue_morse_spec()
    assert copy_structure(tm, 1, 8) == [coefficient(tm, 0, l) for l in range(8)]
    cor = corollary22_spec()
    scalars = copy_structure(cor, 1, 4)
    assert scalars == [coefficient(cor, 0, 2 * l) for l in range(4)]
    assert scalars == [1, Fraction(1, 4), Fraction(1, 16), Fraction(1, 64)]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_copy_structure_refines(seed):
    # level n+1 blocks are blocks of level-n blocks, so their scalars are a
    # subsequence of the level-n scalars
    rng = random.Random(seed)
    spec = random_rational_spec(rng, qmax=3)
    n = rng.randint(0, 2)
    q = spec.radix.q(n + 1)
    coarse = copy_structure(spec, n + 1, 3)
    fine = copy_structure(spec, n, 3 * q)
    assert coarse == [fine[l * q] for l in range(3)]


def test_copy_structure_flags_corrupt_data(monkeypatch):
    real = product_engine.expand

    def corrupted(spec, n, N):
        seq = real(spec, n, N)
        seq[5] = seq[5] + 1
        return seq

    monkeypatch.setattr(product_engine, "expand", corrupted)
    with pytest.raises(StructureViolation) as info:
        copy_structure(all_ones_spec(), 2, 4)
    assert info.value.position == 5


def test_evaluate_examples():
    assert evaluate(all_ones_spec(), 2, Fraction(1, 10**20)).contains(2)
    iv = evaluate(all_ones_spec(PERIODIC_35), 7, Fraction(1, 10**30))
    assert iv.contains(Fraction(7, 6))
    assert iv.width <= Fraction(2, 10**30)


def test_thue_morse_intervals_nest():
    spec = thue_morse_spec()
    ivs = [iv for n in range(12) if (iv := evaluation_interval(spec, 2, n)) is not None]
    assert len(ivs) >= 8
    for outer, inner in zip(ivs, ivs[1:]):
        assert outer.contains_interval(inner)
        assert outer.contains(inner.mid)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 6))
def test_evaluation_intervals_nest(seed, b):
    spec = random_rational_spec(random.Random(seed), positive=True)
    ivs = [iv for n in range(8) if (iv := evaluation_interval(spec, b, n)) is not None]
    for outer, inner in zip(ivs, ivs[1:]):
        assert outer.contains_interval(inner)


def test_zero_factor_is_reported():
    spec = ProductSpec(BINARY, CoeffRule("constant", rows=(Fraction(-2),)))
    with pytest.raises(ZeroFactor):
        evaluate(spec, 2, Fraction(1, 100))


def test_boundedness_examples():
    assert boundedness_report(all_ones_spec(), 3, 64).sup_ratio == 1
    assert boundedness_report(thue_morse_spec(), 4, 256).sup_ratio == 1


def _factorial_coeff_oracle(n, m):
    # digits of m in binary, shifted by n; c_y = 2^(-2^y) at y in {1, 2, 6, 24}
    value = Fraction(1)
    for k, bit in enumerate(reversed(bin(m)[2:])):
        if bit == "1" and (n + k) in (1, 2, 6, 24):
            value /= 2 ** (2 ** (n + k))
    return value


def test_boundedness_factorial_support_grows():
    report = boundedness_report(corollary22_spec(), 3, 64)
    oracle = max(_factorial_coeff_oracle(n, m) / _factorial_coeff_oracle(0, m)
                 for n in range(4) for m in range(65))
    assert report.sup_ratio == oracle == 2**64
    assert report.argmax == (1, 64)


def test_factorial_support_values():
    spec = corollary22_spec()
    assert [spec.c(1, y) for y in (0, 1, 2, 3, 5, 6, 7)] == [
        1, Fraction(1, 4), Fraction(1, 16), 1, 1, Fraction(1, 2**64), 1]
    big = spec.c(1, 24)
    assert isinstance(big, BigPow) and big.den_exp == 2**24


def test_cap_exceeded_on_materialization(monkeypatch):
    monkeypatch.setenv("CANTOR_MAX_BITS", "32")
    spec = corollary22_spec()
    with pytest.raises(CapExceeded):
        expand(spec, 0, 128)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_spec_json_roundtrip(seed):
    rng = random.Random(seed)
    spec = random_rational_spec(rng)
    assert ProductSpec.from_json(spec.to_json()) == spec
    uspec = random_unit_spec(rng, 3)
    assert ProductSpec.from_json(uspec.to_json()) == uspec


def test_spec_json_named():
    for spec in (all_ones_spec(PERIODIC_35), thue_morse_spec(), corollary22_spec(3)):
        assert ProductSpec.from_json(spec.to_json()) == spec


@pytest.mark.parametrize("data", [
    {},
    {"radix": {"kind": "constant", "q": 2}, "domain": "complex",
     "coeffs": {"kind": "constant", "value": "1"}},
    {"radix": {"kind": "constant", "q": 2}, "domain": "rational",
     "coeffs": {"kind": "constant", "value": "1"}, "colour": 1},
    {"radix": {"kind": "constant", "q": 2}, "domain": "rational", "L": 3,
     "coeffs": {"kind": "constant", "value": "1"}},
])
def test_spec_json_rejects_bad_input(data):
    with pytest.raises(SpecParseError):
        ProductSpec.from_json(data)


def test_deep_tail_of_factorial_spec_stays_symbolic():
    spec = corollary22_spec()
    # a_24(1) = c_24 = 2^(-2^24): 2^24 denominator bits, over the default 2^20 cap
    value = coefficient(spec, 24, 1)
    assert value == BigPow(Fraction(1), 2, 2**24)
    with pytest.raises(CapExceeded):
        materialize(value)
    assert cumulative_product(spec.radix, 24) == 2**24
