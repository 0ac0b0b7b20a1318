from __future__ import annotations

import itertools
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import matrices, signed_perms, words
from so6synth import dyadic as dy
from so6synth.errors import InvalidMatrix
from so6synth.oracle import big_matmul
from so6synth.so6 import (
    NUM_GENERATORS, PAIRS, GenIndex, SignedPerm, SO6Matrix, Word, all_signed_perms, apply_gen,
    det, evaluate_word, gate_image, generator, is_orthogonal, lehmer_rank, lehmer_unrank, mat_mul,
    normalize_factors, push_through, random_word, validate,
)

I = SO6Matrix.identity()
H = (1, 0, 1)    # 1/sqrt2
MH = (-1, 0, 1)  # -1/sqrt2


def G(i: int, j: int) -> GenIndex:
    return GenIndex(i, j, involutive=False)


def plain(*factors: tuple[int, int, int]) -> SO6Matrix:
    """Product of plain generators, ``(i, j, power)`` each, via evaluate_word."""
    steps = tuple(G(i, j) for i, j, p in factors for _ in range(p))
    return evaluate_word(Word(steps))


def from_ints(rows) -> SO6Matrix:
    return SO6Matrix.from_rows([[(x, 0, 0) for x in row] for row in rows])


# ---------------------------------------------------------------------------
# generators

def test_plain_generator_display():
    expected = SO6Matrix.from_rows([
        [(1, 0, 0), 0, 0, 0, 0, 0],
        [0, H, 0, MH, 0, 0],
        [0, 0, (1, 0, 0), 0, 0, 0],
        [0, H, 0, H, 0, 0],
        [0, 0, 0, 0, (1, 0, 0), 0],
        [0, 0, 0, 0, 0, (1, 0, 0)],
    ])
    assert generator(G(2, 4)) == expected


def test_involutive_block():
    M = generator(GenIndex(1, 2))
    assert M.word(0, 0) == dy.reduce(*H) and M.word(0, 1) == dy.reduce(*H)
    assert M.word(1, 0) == dy.reduce(*H) and M.word(1, 1) == dy.reduce(*MH)
    assert det(M) == -1
    assert det(generator(G(1, 2))) == 1


@pytest.mark.parametrize("gid", range(NUM_GENERATORS))
def test_involutions_square_to_identity(gid):
    X = generator(gid)
    assert mat_mul(X, X) == I
    assert big_matmul(X, X) == I


@pytest.mark.parametrize("gid", range(NUM_GENERATORS))
@pytest.mark.parametrize("involutive", [True, False])
def test_apply_gen_matches_matrix_product(gid, involutive, rng):
    g = GenIndex.from_id(gid, involutive)
    assert apply_gen(g, I) == generator(g)
    U = evaluate_word(random_word(5, rng))
    assert apply_gen(g, U) == big_matmul(generator(g), U)


def test_bad_generator_index():
    for i, j in [(0, 1), (2, 2), (3, 2), (5, 7)]:
        with pytest.raises(ValueError):
            GenIndex(i, j)
    assert len(PAIRS) == 15
    assert [GenIndex.from_id(k).id for k in range(15)] == list(range(15))


# ---------------------------------------------------------------------------
# gate identities, plain generators

def test_t_gates():
    assert plain((1, 2, 1)) == gate_image("T0")
    assert plain((4, 5, 1)) == gate_image("T1")


def test_s_gates():
    assert plain((1, 2, 2)) == gate_image("S0")
    assert plain((4, 5, 2)) == gate_image("S1")


def test_h_gates():
    assert plain((1, 3, 2), (2, 3, 4)) == gate_image("H0")
    assert plain((4, 6, 2), (5, 6, 4)) == gate_image("H1")


def test_cz_squared_product():
    assert plain((1, 2, 2), (3, 6, 2), (4, 5, 2)) == gate_image("CZ")


def test_cz_single_product_is_not_clifford():
    # three commuting quarter-turn blocks keep 1/sqrt2 entries
    M = plain((1, 2, 1), (3, 6, 1), (4, 5, 1))
    assert SignedPerm.from_matrix(M) is None
    assert M != gate_image("CZ")


def test_gate_images_are_signed_perms_or_t():
    for name in ("H0", "H1", "S0", "S1", "CZ"):
        M = gate_image(name)
        assert SignedPerm.from_matrix(M) is not None
        assert validate(M) == 1
    for name in ("T0", "T1"):
        assert validate(gate_image(name)) == 1
    with pytest.raises(ValueError):
        gate_image("X9")


# ---------------------------------------------------------------------------
# signed permutations

def test_signed_perm_count_and_det():
    dets = [p.det() for p in all_signed_perms()]
    assert len(dets) == 46080
    assert dets.count(1) == 23040


def test_lehmer_examples():
    assert lehmer_rank((0, 1, 2, 3, 4, 5)) == 0
    assert lehmer_rank((5, 4, 3, 2, 1, 0)) == 719
    assert lehmer_unrank(1) == (0, 1, 2, 3, 5, 4)
    with pytest.raises(ValueError):
        lehmer_unrank(720)


@given(st.permutations(range(6)))
def test_lehmer_round_trip(perm):
    assert lehmer_unrank(lehmer_rank(perm)) == tuple(perm)


@given(signed_perms, signed_perms)
def test_signed_perm_group_laws(p, q):
    assert p.compose(p.inverse()) == SignedPerm.identity()
    assert SignedPerm.from_code(p.code) == p
    assert p.compose(q).matrix() == mat_mul(p.matrix(), q.matrix())
    assert p.det() == det(p.matrix())
    assert SignedPerm.from_matrix(p.matrix()) == p


@given(signed_perms, matrices(max_len=4))
def test_signed_perm_actions(p, U):
    assert p.act_left(U) == mat_mul(p.matrix(), U)
    assert p.act_right(U) == mat_mul(U, p.matrix())


def test_signed_perm_string():
    p = SignedPerm((4, 5, 1, 0, 2, 3), (1, -1, 1, -1, -1, 1))
    assert str(p) == "P[5 6 2 1 3 4; + - + - - +]"


@given(signed_perms, st.integers(0, NUM_GENERATORS - 1))
def test_push_through(p, gid):
    g2, q = push_through(p, gid)
    assert mat_mul(p.matrix(), generator(gid)) == mat_mul(generator(g2), q.matrix())


# ---------------------------------------------------------------------------
# words and closure

_STEP = re.compile(r"X\((\d),(\d)\)")


def test_words_match_frozen(vectors):
    for case in vectors["words"]:
        steps = tuple(GenIndex(int(i), int(j)) for i, j in _STEP.findall(case["word"]))
        assert evaluate_word(Word(steps)).entries == tuple(case["matrix"])


@given(words(max_len=8, with_correction=True))
def test_word_closure(w):
    U = evaluate_word(w)
    assert is_orthogonal(U)
    assert validate(U) == (-1) ** w.tcount * w.correction.det()


@given(words(max_len=8))
def test_exponent_growth(w):
    assert evaluate_word(w).max_exponent() <= w.tcount


@given(words(max_len=6, with_correction=True), signed_perms)
def test_normalize_factors_exact(w, p):
    factors = [p, *w.steps, w.correction, G(2, 5), p.inverse()]
    expected = mat_mul(mat_mul(mat_mul(p.matrix(), evaluate_word(w)), generator(G(2, 5))),
                       p.inverse().matrix())
    out = normalize_factors(factors)
    assert out.tcount == w.tcount + 1
    assert evaluate_word(out) == expected


def test_validate_rejects():
    with pytest.raises(InvalidMatrix):
        validate(from_ints([[1, 1, 0, 0, 0, 0]] + [[0] * 6] * 5))
    rows = [[1 if r == c else 0 for c in range(6)] for r in range(6)]
    rows[0][0] = 2
    with pytest.raises(InvalidMatrix):
        validate(from_ints(rows))
    with pytest.raises(InvalidMatrix):
        SO6Matrix([0] * 35)


def test_det_of_odd_perm():
    P = from_ints([[0, 1, 0, 0, 0, 0], [1, 0, 0, 0, 0, 0]] +
                  [[1 if r == c else 0 for c in range(6)] for r in range(2, 6)])
    assert det(P) == -1


def test_plain_and_involutive_differ_by_swap():
    for i, j in itertools.islice(PAIRS, 5):
        X = generator(GenIndex(i, j))
        Gm = generator(G(i, j))
        swap = SignedPerm.from_matrix(mat_mul(X, Gm.transpose()))
        assert swap is not None and swap.det() == -1
