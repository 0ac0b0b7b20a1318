from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from so6synth import dyadic as dy
from so6synth.dyadic import Dyadic
from so6synth.errors import DyadicOverflow
from so6synth.oracle import BigDyadic, OracleRangeError

from conftest import reduced_words


def big(w: int) -> BigDyadic:
    return BigDyadic.from_word(w)


def agrees(fn, expected: BigDyadic) -> bool:
    """Production result equals the oracle, or overflow is reported exactly when it cannot fit."""
    try:
        want = expected.to_word()
    except OracleRangeError:
        with pytest.raises(DyadicOverflow):
            fn()
        return True
    return fn() == want


small = reduced_words(max_c=10, bits=6)


def test_reduce_examples(vectors):
    for case in vectors["reduce"]:
        assert dy.unpack(dy.reduce(*case["in"])) == tuple(case["out"])


def test_frozen_operations(vectors):
    ops = {"add": dy.add, "sub": dy.sub, "mul": dy.mul}
    unary = {"twist": dy.twist, "div_sqrt2": dy.div_sqrt2, "neg": dy.neg}
    for case in vectors["dyadic"]:
        x = dy.pack(*case["x"])
        if case["op"] in ops:
            got = ops[case["op"]](x, dy.pack(*case["y"]))
        else:
            got = unary[case["op"]](x)
        assert dy.unpack(got) == tuple(case["out"]), case


def test_documented_examples():
    assert dy.unpack(dy.add(dy.pack(1, 0, 1), dy.pack(1, 0, 0))) == (1, 1, 1)
    assert dy.unpack(dy.add(dy.pack(1, 0, 1), dy.pack(1, 0, 1))) == (0, 1, 0)
    assert dy.unpack(dy.mul(dy.pack(1, 1, 0), dy.pack(-1, 1, 0))) == (1, 0, 0)
    assert dy.unpack(dy.mul(dy.pack(1, 0, 1), dy.pack(1, 0, 1))) == (1, 0, 2)
    assert dy.div_sqrt2(dy.ZERO) == dy.ZERO
    assert dy.unpack(dy.div_sqrt2(dy.pack(1, 0, 0))) == (1, 0, 1)
    assert dy.unpack(dy.div_sqrt2(dy.pack(0, 1, 0))) == (1, 0, 0)
    assert dy.unpack(dy.twist(dy.pack(1, 1, 0))) == (1, -1, 0)
    assert dy.twist(dy.ZERO) == dy.ZERO


def test_order_key_examples():
    assert dy.order_key(dy.ZERO) < dy.order_key(dy.pack(1, 0, 0))
    assert dy.order_key(dy.pack(1, 0, 1)) > dy.order_key(dy.pack(1, 1, 0))


def test_overflow_is_reported():
    with pytest.raises(DyadicOverflow):
        dy.pack(1 << 25, 0, 0)
    with pytest.raises(DyadicOverflow):
        dy.pack(1, 0, 1 << 12)
    big_a = dy.pack((1 << 25) - 1, 0, 0)
    with pytest.raises(DyadicOverflow):
        dy.add(big_a, big_a)


def test_pack_rejects_nothing_silently():
    for a, b, c in [(-(1 << 25), 0, 1), ((1 << 25) - 1, -(1 << 25), 4095)]:
        assert dy.unpack(dy.pack(a, b, c)) == (a, b, c)


@given(reduced_words(), reduced_words())
def test_add_sub_mul_match_oracle(x, y):
    assert agrees(lambda: dy.add(x, y), big(x) + big(y))
    assert agrees(lambda: dy.sub(x, y), big(x) - big(y))
    assert agrees(lambda: dy.mul(x, y), big(x) * big(y))


@given(reduced_words())
def test_unary_match_oracle(x):
    assert big(dy.twist(x)) == big(x).twist()
    assert big(dy.div_sqrt2(x)) == big(x).div_sqrt2()
    assert big(dy.neg(x)) == -big(x)
    assert dy.mul_sqrt2(dy.div_sqrt2(x)) == x


@given(reduced_words())
def test_identities(x):
    assert dy.add(x, dy.ZERO) == x
    assert dy.mul(x, dy.pack(1, 0, 0)) == x
    assert dy.twist(dy.twist(x)) == x
    assert dy.add(x, dy.neg(x)) == dy.ZERO


@given(st.integers(-5000, 5000), st.integers(-5000, 5000), st.integers(0, 40))
def test_reduce_idempotent_and_value_preserving(a, b, c):
    w = dy.reduce(a, b, c)
    ra, rb, rc = dy.unpack(w)
    assert dy.is_reduced(ra, rb, rc)
    assert dy.reduce(ra, rb, rc) == w
    assert big(w) == BigDyadic.make(a, b, c)


@given(reduced_words(), reduced_words())
def test_equal_values_have_equal_words(x, y):
    assert (big(x) == big(y)) == (x == y)
    assert (dy.order_key(x) == dy.order_key(y)) == (x == y)
    assert (dy.sort_key(x) < dy.sort_key(y)) == (dy.order_key(x) < dy.order_key(y))
    assert dy.from_sort_key(dy.sort_key(x)) == x


@given(small, small, small)
def test_ring_laws(x, y, z):
    assert dy.add(x, y) == dy.add(y, x)
    assert dy.mul(x, y) == dy.mul(y, x)
    assert dy.add(dy.add(x, y), z) == dy.add(x, dy.add(y, z))
    assert dy.mul(dy.mul(x, y), z) == dy.mul(x, dy.mul(y, z))
    assert dy.mul(x, dy.add(y, z)) == dy.add(dy.mul(x, y), dy.mul(x, z))


@given(small, small)
def test_twist_is_a_homomorphism(x, y):
    assert dy.twist(dy.add(x, y)) == dy.add(dy.twist(x), dy.twist(y))
    assert dy.twist(dy.mul(x, y)) == dy.mul(dy.twist(x), dy.twist(y))


@given(reduced_words(), reduced_words())
def test_unequal_exponents_need_no_reduction(x, y):
    _, _, cx = dy.unpack(x)
    _, _, cy = dy.unpack(y)
    if x == dy.ZERO or y == dy.ZERO:
        return
    a, b, c, steps = dy.add_fields(x, y)
    if cx != cy:
        assert steps == 0
        assert a & 1
    elif cx > 0:
        # equal exponents: both integer coefficients are odd, so the raw sum is even
        assert dy.unpack(x)[0] + dy.unpack(y)[0] == 0 or (dy.unpack(x)[0] + dy.unpack(y)[0]) % 2 == 0


def test_value_wrapper():
    x = Dyadic(2, 2, 2)
    assert x.fields == (1, 1, 0)
    assert (x * Dyadic(-1, 1, 0)).fields == (1, 0, 0)
    assert abs(float(x) - (1 + 2 ** 0.5)) < 1e-12
    with pytest.raises(AttributeError):
        x.word = 0


def test_unit_interval():
    assert dy.in_unit_interval(dy.pack(1, 0, 1))
    assert dy.in_unit_interval(dy.pack(-1, 0, 0))
    assert not dy.in_unit_interval(dy.pack(1, 1, 0))  # 1 + sqrt2
    assert not dy.in_unit_interval(dy.pack(1, 1, 2))  # twist is (1 - sqrt2)/2, but 1 + sqrt2 > 2
