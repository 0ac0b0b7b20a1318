from __future__ import annotations

import math

import pytest
from hypothesis import given, settings

from conftest import matrices, reduced_words, signed_perms
from so6synth import dyadic as dy
from so6synth.oracle import (
    BigDyadic, OracleRangeError, big_matmul, naive_bfs, naive_canon, naive_equivalent,
)
from so6synth.so6 import SignedPerm, SO6Matrix, evaluate_word, gate_image, mat_mul, random_word

I = SO6Matrix.identity()


def test_small_bfs():
    layers = naive_bfs(I, 3)
    assert [len(s) for s in layers] == [1, 1, 2, 6]
    assert naive_bfs(I, 0) == [{naive_canon(I)}]


def test_bfs_guards():
    with pytest.raises(ValueError):
        naive_bfs(I, 5)
    with pytest.raises(ValueError):
        naive_bfs(I, 1, variant="u6")


def test_frozen_bfs_counts(vectors):
    assert vectors["bfs"]["o6"]["counts"] == [1, 1, 2, 6, 19]
    assert vectors["bfs"]["so6"]["counts"] == [1, 1, 2, 6, 19]


def test_variants_differ_on_classes(vectors):
    # same sizes, but the det-one orbit minimum is a different matrix
    assert vectors["bfs"]["o6"]["classes"][2] != vectors["bfs"]["so6"]["classes"][2]


def test_big_values():
    x = BigDyadic.make(4, 2, 4)
    assert (x.a, x.b, x.c) == (1, 1, 1)
    assert math.isclose(x.value(), (4 + 2 * math.sqrt(2)) / 4)
    assert BigDyadic.make(0, 0, 9) == BigDyadic(0, 0, 0)
    with pytest.raises(OracleRangeError):
        BigDyadic.make(1 << 30, 0, 0).to_word()


@given(reduced_words(max_c=20, bits=10))
def test_big_word_round_trip(w):
    assert BigDyadic.from_word(w).to_word() == w


@given(reduced_words(max_c=10, bits=8), reduced_words(max_c=10, bits=8))
def test_big_ring_values(x, y):
    bx, by = BigDyadic.from_word(x), BigDyadic.from_word(y)
    assert math.isclose((bx * by).value(), bx.value() * by.value(), rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose((bx + by).value(), bx.value() + by.value(), rel_tol=1e-9, abs_tol=1e-9)
    assert bx.twist().twist() == bx


@given(matrices(max_len=5), matrices(max_len=5))
def test_big_matmul_agrees(A, B):
    assert big_matmul(A, B) == mat_mul(A, B)


@settings(max_examples=20)
@given(matrices(max_len=5), signed_perms, signed_perms)
def test_naive_canon_invariant(U, p, q):
    assert naive_canon(q.act_right(p.act_left(U))) == naive_canon(U)


def test_naive_equivalent_examples(rng):
    assert naive_equivalent(gate_image("T0"), gate_image("T1"))
    assert not naive_equivalent(I, gate_image("T0"))
    U = evaluate_word(random_word(5, rng))
    V = SignedPerm.random(rng).act_left(U)
    assert naive_equivalent(U, V)


def test_so6_variant_is_finer():
    # det-one actions preserve the determinant, so an odd swap leaves the orbit
    odd = SignedPerm((1, 0, 2, 3, 4, 5), (1,) * 6)
    assert naive_equivalent(I, odd.act_left(I), "o6")
    assert not naive_equivalent(I, odd.act_left(I), "so6")
    assert naive_equivalent(I, gate_image("CZ"), "so6")


def test_twist_matches_conjugate():
    r = math.sqrt(2)
    for a, b, c in [(1, 1, 0), (3, -2, 1), (1, 0, 3), (5, 7, 5)]:
        x = BigDyadic.make(a, b, c)
        assert math.isclose(x.twist().value(), (a - b * r) / (-r) ** c)
        w = dy.reduce(a, b, c)
        assert BigDyadic.from_word(dy.twist(w)) == x.twist()
