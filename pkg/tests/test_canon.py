from __future__ import annotations

import pytest
from hypothesis import given, settings

from conftest import matrices, signed_perms
from so6synth import canon
from so6synth import dyadic as dy
from so6synth.oracle import naive_canon, naive_equivalent
from so6synth.so6 import SignedPerm, SO6Matrix, all_signed_perms, evaluate_word, gate_image, mat_mul, random_word

I = SO6Matrix.identity()


def named(name: str) -> SO6Matrix:
    return I if name == "I" else gate_image(name)


@given(matrices(max_len=6), signed_perms, signed_perms)
def test_orbit_invariance(U, p, q):
    V = q.act_right(p.act_left(U))
    assert canon.canonicalize(V).matrix == canon.canonicalize(U).matrix
    assert canon.signature(V) == canon.signature(U)


@given(matrices(max_len=6))
def test_witnesses(U):
    cf = canon.canonicalize(U)
    assert cf.left.act_left(cf.right.act_right(U)) == cf.matrix


@given(matrices(max_len=6))
def test_idempotent(U):
    M = canon.canonical_matrix(U)
    again = canon.canonicalize(M)
    assert again.matrix == M
    assert again.left.act_left(again.right.act_right(M)) == M


def test_frozen_canon(vectors):
    for case in vectors["words"]:
        U = SO6Matrix(case["matrix"])
        assert canon.canonical_matrix(U).entries == tuple(case["canon"])


def test_frozen_gate_canon(vectors):
    for name, entries in vectors["gate_canon"].items():
        assert canon.canonical_matrix(named(name)).entries == tuple(entries)


def test_frozen_equivalences(vectors):
    for case in vectors["equivalent"]:
        assert canon.equivalent(named(case["a"]), named(case["b"])) is case["equivalent"]


def test_single_t_classes():
    assert canon.signature(gate_image("T0")) == canon.signature(gate_image("T1"))
    assert canon.signature(I) != canon.signature(gate_image("T0"))
    assert canon.equivalent(gate_image("CZ"), I)


_SAMPLE_L = list(all_signed_perms())[::997]
_SAMPLE_R = list(all_signed_perms())[::4099]


@settings(max_examples=20)
@given(matrices(max_len=4))
def test_minimal_over_orbit_sample(U):
    # the form is a lexicographic minimum, so no orbit member may sort below it
    best = tuple(dy.order_key(w) for w in canon.canonical_matrix(U).entries)
    for p in _SAMPLE_L:
        V = p.act_left(U)
        for q in _SAMPLE_R:
            assert tuple(dy.order_key(w) for w in q.act_right(V).entries) >= best


def test_matches_naive_random(rng):
    for _ in range(15):
        U = evaluate_word(random_word(rng.randint(0, 6), rng))
        V = evaluate_word(random_word(rng.randint(0, 6), rng))
        assert canon.equivalent(U, V) == naive_equivalent(U, V)
        assert canon.canonical_matrix(U) == naive_canon(U)


def test_automorphisms_fix_matrix(rng):
    for _ in range(5):
        U = evaluate_word(random_word(4, rng))
        for A, B in canon.automorphisms(U):
            assert A.act_left(B.act_right(U)) == U


def test_odd_automorphism_of_identity():
    assert canon.has_odd_automorphism(I)
    neg = SignedPerm(tuple(range(6)), (-1,) * 6)
    assert mat_mul(neg.matrix(), neg.matrix()) == I


@pytest.mark.parametrize("name", ["H0", "H1", "S0", "S1", "CZ"])
def test_cliffords_in_identity_class(name):
    assert canon.equivalent(gate_image(name), I)
