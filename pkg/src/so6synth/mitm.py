"""Bidirectional (meet-in-the-middle) search for T-count-optimal words.

Two lookup tables grow from ``r_L`` and ``r_R``; the one with the smaller last
layer is extended each round.  Every class newly inserted on one side is
looked up in the *whole* opposite side, and the first hit is returned.

Why the first hit is optimal: while no hit has happened the two sides are
disjoint, so with complete layers ``0..a`` and ``0..b`` the true distance
``D`` satisfies ``D > a + b``.  A new class at depth ``a + 1`` that hits depth
``b' <= b`` gives a word of length ``a + 1 + b' >= D``, which forces
``b' = b`` and equality.

The optional brute-force probe walks up to two generators past one side's
last layer without storing anything.  Since every path between two classes
has the same length parity, a probe hit at depth two can only come from an
opposite-side class of depth at most ``a - 1``, so it is optimal too.  Three
steps would not be, which is why the probe depth is capped at two.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import canon
from .errors import IntegrityError, SearchBudgetExceeded
from .lutgen import Lut, Node, Reconstruction, extend_one_step, init_lut, reconstruct_exact
from .so6 import (N, NUM_GENERATORS, X_KERNELS, GenIndex, SignedPerm, SO6Matrix, Word, all_signed_perms,
                  evaluate_word, mat_mul, normalize_factors)

MAX_PROBE_DEPTH = 2


@dataclass
class MitmResult:
    """``evaluate_word(word) @ r_L @ c0 == r_R`` exactly."""

    word: Word
    tcount: int
    meet_class: SO6Matrix
    left_depth: int
    right_depth: int
    c0: SignedPerm = field(default_factory=SignedPerm.identity)
    probe_depth: int = 0
    probe_word: tuple[GenIndex, ...] = ()
    seconds: float = 0.0
    extensions: int = 0


class Side:
    """One half of the search: a LUT plus how many of its layers are in play.

    A prebuilt table can seed a side.  Its layers are released one at a time
    as if they had just been generated, so the search behaves exactly as it
    would from scratch; only the canonicalisation work is saved.
    """

    def __init__(self, root: SO6Matrix, prebuilt: Lut | None = None):
        if prebuilt is not None:
            if prebuilt.root != root:
                raise ValueError("prebuilt table was built from a different root")
            self.lut = prebuilt
            self.base_depth = prebuilt.depth
        else:
            self.lut = init_lut(root)
            self.base_depth = None
        self.visible = 0
        self.last_seconds = 0.0

    @property
    def root(self) -> SO6Matrix:
        return self.lut.root

    @property
    def frontier(self) -> list[Node]:
        return self.lut.layers[self.visible]

    def locate(self, M: SO6Matrix) -> tuple[int, int] | None:
        loc = self.lut.find(M)
        if loc is None or loc[0] > self.visible:
            return None
        return loc

    def node(self, loc: tuple[int, int]) -> Node:
        return self.lut.layers[loc[0]][loc[1]]

    def extend(self, on_insert, threads: int = 1) -> None:
        t0 = time.perf_counter()
        depth = self.visible + 1
        if depth <= self.lut.depth:
            self.visible = depth
            for idx, node in enumerate(self.lut.layers[depth]):
                if on_insert(idx, node):
                    break
        else:
            extend_one_step(self.lut, threads=threads, on_insert=on_insert)
            self.visible = depth
        self.last_seconds = time.perf_counter() - t0

    def restore(self) -> None:
        """Drop layers added beyond a prebuilt table so it can be reused."""
        if self.base_depth is not None and self.lut.depth > self.base_depth:
            truncate(self.lut, self.base_depth)


def truncate(lut: Lut, depth: int) -> None:
    while lut.depth > depth:
        for n in lut.layers.pop():
            lut.index.pop(n.canon.entries, None)
        lut.stats.pop()
    lut.signatures = {canon.signature(n.canon) for layer in lut.layers for n in layer}


# ---------------------------------------------------------------------------
# Clifford fix-up


def clifford_fixup(A: SO6Matrix, B: SO6Matrix, method: str = "canonical") -> tuple[SignedPerm, SignedPerm]:
    """Signed permutations ``(c0, c1)`` with ``c1 @ A @ c0 == B``.

    The default reads them off the canonical-form witnesses.  ``"brute"``
    scans every ``c0`` (pruned by column multisets) and tests whether
    ``B (A c0)^T`` is a signed permutation.
    """
    if method == "canonical":
        fa, fb = canon.canonicalize(A), canon.canonicalize(B)
        if fa.matrix != fb.matrix:
            raise IntegrityError("clifford_fixup called on inequivalent matrices")
        c1 = fb.left.inverse().compose(fa.left)
        c0 = fa.right.compose(fb.right.inverse())
    elif method == "brute":
        c0, c1 = _fixup_brute(A, B)
    else:
        raise ValueError(f"unknown fix-up method {method!r}")
    if c1.act_left(c0.act_right(A)) != B:
        raise IntegrityError("Clifford fix-up failed exact verification")
    return c0, c1


def _fixup_brute(A: SO6Matrix, B: SO6Matrix) -> tuple[SignedPerm, SignedPerm]:
    colkey = lambda M, c: tuple(sorted(canon.entry_key(w) for w in M.columns()[c]))
    ka = [colkey(A, c) for c in range(N)]
    kb = [colkey(B, c) for c in range(N)]
    Bt = B.transpose()
    for c0 in all_signed_perms():
        # column k of A c0 is +-A[:, perm[k]] and must match column k of B up to rows
        if any(ka[c0.perm[k]] != kb[k] for k in range(N)):
            continue
        W = mat_mul(c0.act_right(A), Bt).transpose()  # B (A c0)^T
        c1 = SignedPerm.from_matrix(W)
        if c1 is not None:
            return c0, c1
    raise IntegrityError("no Clifford fix-up exists: matrices are not equivalent")


# ---------------------------------------------------------------------------
# search


def _assemble(left: Side, right: Side, rec_l: Reconstruction, rec_r: Reconstruction,
              fixup: str) -> tuple[Word, SignedPerm]:
    """Word with ``evaluate_word(word) @ r_L @ c0 == r_R`` from two meeting paths."""
    m_l, m_r = rec_l.word, rec_r.word
    A = mat_mul(evaluate_word(m_l), left.root)
    B = mat_mul(evaluate_word(m_r), right.root)
    c0, c1 = clifford_fixup(A, B, fixup)
    # r_R = m_R^-1 c1 m_L r_L c0, and every generator is its own inverse
    factors: list = [m_r.correction.inverse()]
    factors.extend(reversed(m_r.steps))
    factors.append(c1)
    factors.extend(m_l.steps)
    factors.append(m_l.correction)
    word = normalize_factors(factors)
    if c0.act_right(mat_mul(evaluate_word(word), left.root)) != right.root:
        raise IntegrityError("assembled word does not map r_L onto r_R")
    return word, c0


def extend_one_step_mitm(to_extend: Side, to_check: Side, threads: int = 1,
                         deepest_only: bool = False) -> tuple[int, Node, tuple[int, int]] | None:
    """Grow ``to_extend`` by one layer, stopping at the first class ``to_check`` knows."""
    hit: list = []
    depth = to_extend.visible + 1

    def probe(idx: int, node: Node) -> bool:
        loc = to_check.locate(node.canon)
        if loc is None or (deepest_only and loc[0] != to_check.visible):
            return False
        hit.append((idx, node, loc))
        return True

    to_extend.extend(probe, threads)
    if hit:
        idx, node, loc = hit[0]
        return depth, node, loc
    return None


def brute_probe(lut_side: Side, other: Side, budget: float | None, max_depth: int = MAX_PROBE_DEPTH):
    """Walk up to ``max_depth`` steps past ``other``'s last layer, storing nothing.

    Returns ``(node_depth, node, steps, meet_matrix, loc)`` where ``steps`` are
    (generator, witness) pairs applied after ``node``, or None when the budget
    runs out first.
    """
    if budget is not None and budget <= 0:
        return None
    if not 1 <= max_depth <= MAX_PROBE_DEPTH:
        raise ValueError(f"probe depth must be 1..{MAX_PROBE_DEPTH}")
    deadline = None if budget is None else time.perf_counter() + budget
    depth = other.visible

    def walk(entries, skip, trail):
        for gid in range(NUM_GENERATORS):
            if gid == skip:
                continue
            if deadline is not None and time.perf_counter() > deadline:
                raise TimeoutError
            cf = canon.canonicalize(SO6Matrix(X_KERNELS[gid](entries)))
            steps = trail + ((gid, cf),)
            loc = lut_side.locate(cf.matrix)
            if loc is not None:
                return steps, cf.matrix, loc
            if len(steps) < max_depth:
                found = walk(cf.matrix.entries, -1, steps)
                if found:
                    return found
        return None

    try:
        for node in other.frontier:
            found = walk(node.canon.entries, node.skip, ())
            if found:
                steps, M, loc = found
                return depth, node, steps, M, loc
    except TimeoutError:
        return None
    return None


def _probe_reconstruction(side: Side, depth: int, node: Node, steps) -> Reconstruction:
    """Exact factorisation of a class reached by probe steps from a stored node."""
    base = reconstruct_exact(side.lut, depth, node)
    factors: list = []
    right = base.right
    for gid, cf in reversed(steps):
        factors.append(cf.left)
        factors.append(GenIndex.from_id(gid))
    for gid, cf in steps:
        right = right.compose(cf.right)
    factors.extend(base.word.steps)
    factors.append(base.word.correction)
    return Reconstruction(normalize_factors(factors), right)


def mitm(rL: SO6Matrix, rR: SO6Matrix, *, max_tcount: int | None = None, threads: int = 1,
         probe: bool = False, probe_budget: float | None = None,
         left_lut: Lut | None = None, right_lut: Lut | None = None,
         fixup: str = "canonical", deepest_only: bool = False) -> MitmResult:
    """T-count-optimal word ``w`` with ``evaluate_word(w) @ rL @ c0 == rR``.

    ``probe_budget`` is in seconds; ``None`` means "as long as the previous
    layer extension took".  ``max_tcount`` caps the search, raising
    :class:`SearchBudgetExceeded` when reached.
    """
    t0 = time.perf_counter()
    left = Side(rL, left_lut)
    right = Side(rR, right_lut)
    try:
        return _mitm(left, right, max_tcount, threads, probe, probe_budget, fixup, deepest_only, t0)
    finally:
        left.restore()
        right.restore()


def _mitm(left, right, max_tcount, threads, probe, probe_budget, fixup, deepest_only, t0) -> MitmResult:
    if left.lut.layers[0][0].canon == right.lut.layers[0][0].canon:
        M = left.lut.layers[0][0].canon
        rec_l = reconstruct_exact(left.lut, 0, left.lut.layers[0][0])
        rec_r = reconstruct_exact(right.lut, 0, right.lut.layers[0][0])
        word, c0 = _assemble(left, right, rec_l, rec_r, fixup)
        return MitmResult(word, 0, M, 0, 0, c0, seconds=time.perf_counter() - t0)

    extensions = 0
    while True:
        if max_tcount is not None and left.visible + right.visible + 1 > max_tcount:
            raise SearchBudgetExceeded(
                f"no word with T-count <= {max_tcount} (searched depths {left.visible}+{right.visible})")
        grow_left = len(left.frontier) < len(right.frontier)
        ext, chk = (left, right) if grow_left else (right, left)
        if len(ext.frontier) > len(chk.frontier):
            raise AssertionError("frontier policy violated")
        found = extend_one_step_mitm(ext, chk, threads, deepest_only)
        extensions += 1
        if found:
            depth, node, loc = found
            rec_e = reconstruct_exact(ext.lut, depth, node)
            rec_c = reconstruct_exact(chk.lut, loc[0], chk.node(loc))
            a, b = (depth, loc[0]) if grow_left else (loc[0], depth)
            rec_l, rec_r = (rec_e, rec_c) if grow_left else (rec_c, rec_e)
            word, c0 = _assemble(left, right, rec_l, rec_r, fixup)
            return MitmResult(word, a + b, node.canon, a, b, c0,
                              seconds=time.perf_counter() - t0, extensions=extensions)
        if probe:
            nxt_left = len(left.frontier) < len(right.frontier)
            other, lut_side = (left, right) if nxt_left else (right, left)
            cap = MAX_PROBE_DEPTH
            if max_tcount is not None:
                cap = min(cap, max_tcount - left.visible - right.visible)
            budget = probe_budget if probe_budget is not None else ext.last_seconds
            got = brute_probe(lut_side, other, budget, cap) if cap >= 1 else None
            if got:
                ndepth, node, steps, M, loc = got
                rec_o = _probe_reconstruction(other, ndepth, node, steps)
                rec_s = reconstruct_exact(lut_side.lut, loc[0], lut_side.node(loc))
                a_o = ndepth + len(steps)
                a, b = (a_o, loc[0]) if nxt_left else (loc[0], a_o)
                rec_l, rec_r = (rec_o, rec_s) if nxt_left else (rec_s, rec_o)
                word, c0 = _assemble(left, right, rec_l, rec_r, fixup)
                return MitmResult(word, a + b, M, a, b, c0, probe_depth=len(steps),
                                  probe_word=tuple(GenIndex.from_id(g) for g, _ in steps),
                                  seconds=time.perf_counter() - t0, extensions=extensions)


def synthesize(U: SO6Matrix, **kwargs) -> tuple[Word, MitmResult]:
    """Exact optimal word for ``U`` (searching from the identity)."""
    res = mitm(SO6Matrix.identity(), U, **kwargs)
    w = Word(res.word.steps, res.word.correction.compose(res.c0))
    if evaluate_word(w) != U:
        raise IntegrityError("synthesised word does not evaluate to the target")
    return w, res
