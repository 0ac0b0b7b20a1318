from __future__ import annotations

import random

import pytest

from so6synth import canon, lutgen
from so6synth.errors import InvalidMatrix
from so6synth.so6 import SO6Matrix, det, evaluate_word, gate_image, mat_mul, random_word

I = SO6Matrix.identity()


def test_depth_zero():
    lut = lutgen.generate_lut(I, 0)
    assert lut.layer_sizes() == [1]
    assert lut.layers[0][0].canon == canon.canonical_matrix(I)


def test_small_counts(lut5):
    assert lut5.layer_sizes() == [1, 1, 2, 6, 19, 77]
    assert lut5.cumulative()[:4] == [1, 2, 4, 10]


def test_layers_match_oracle(lut5, vectors):
    classes = vectors["bfs"]["o6"]["classes"]
    for d, expected in enumerate(classes):
        got = sorted(list(n.canon.entries) for n in lut5.layers[d])
        assert got == expected


def test_involutive_word_det_parity(rng):
    for k in range(9):
        assert det(evaluate_word(random_word(k, rng))) == (-1) ** k


def test_backtrack_suppression_is_transparent():
    a = lutgen.generate_lut(I, 4, suppress_backtrack=True)
    b = lutgen.generate_lut(I, 4, suppress_backtrack=False)
    assert [a.layer_set(d) for d in range(5)] == [b.layer_set(d) for d in range(5)]
    assert sum(s.candidates for s in a.stats) < sum(s.candidates for s in b.stats)


def test_thread_determinism():
    a = lutgen.generate_lut(I, 5, threads=1)
    b = lutgen.generate_lut(I, 5, threads=3)
    for d in range(6):
        assert [n.canon for n in a.layers[d]] == [n.canon for n in b.layers[d]]
        assert [(n.gen_id, n.parent) for n in a.layers[d]] == [(n.gen_id, n.parent) for n in b.layers[d]]


def test_layers_sorted(lut5):
    for layer in lut5.layers:
        keys = [lutgen.canon_bytes(n.canon) for n in layer]
        assert keys == sorted(keys)


def test_single_t_at_distance_one(lut5):
    hit = lutgen.lut_lookup(lut5, gate_image("T1"))
    assert hit is not None and hit[0] == 1
    assert lutgen.lut_lookup(lut5, gate_image("CZ"))[0] == 0


def test_lookup_reconstruct_round_trip(lut5, rng):
    for _ in range(40):
        U = evaluate_word(random_word(rng.randint(0, 6), rng))
        hit = lutgen.lut_lookup(lut5, U)
        if hit is None:
            continue
        w = lutgen.reconstruct(lut5, hit, U)
        assert w.tcount == hit[0]
        assert evaluate_word(w) == U


def test_every_node_reconstructs(lut5):
    for d, layer in enumerate(lut5.layers):
        for node in layer:
            w = lutgen.reconstruct(lut5, (d, node))
            assert w.tcount == d
            assert evaluate_word(w) == node.canon


def test_miss_returns_none(lut5):
    small = lutgen.generate_lut(I, 2)
    far = lut5.layers[5][0].canon
    assert lutgen.lut_lookup(small, far) is None
    assert lutgen.synthesize(small, far) is None


def test_non_identity_root():
    root = evaluate_word(random_word(3, random.Random(7)))
    lut = lutgen.generate_lut(root, 3)
    assert lut.layer_sizes()[0] == 1
    for d in range(4):
        for node in lut.layers[d]:
            rec = lutgen.reconstruct_exact(lut, d, node)
            assert rec.right.act_right(mat_mul(evaluate_word(rec.word), root)) == node.canon


def test_invalid_root_rejected():
    bad = SO6Matrix.from_rows([[(1, 0, 0)] * 6] + [[0] * 6] * 5)
    with pytest.raises(InvalidMatrix):
        lutgen.generate_lut(bad, 2)
    with pytest.raises(ValueError):
        lutgen.generate_lut(I, -1)


def test_default_threads_env(monkeypatch):
    monkeypatch.setenv("SO6_THREADS", "3")
    assert lutgen.default_threads() == 3


def test_random_root_growth():
    root = evaluate_word(random_word(11, random.Random(99)))
    lut = lutgen.generate_lut(root, 4)
    sizes = lut.layer_sizes()
    assert sizes[0] == 1
    for a, b in zip(sizes, sizes[1:]):
        assert 0 < b <= 15 * a
    assert len(lut.index) == sum(sizes)
