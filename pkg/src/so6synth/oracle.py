"""Slow reference implementations used as ground truth by the test suite.

Nothing here is on a hot path, and nothing here calls the optimised code in
:mod:`dyadic` (beyond the packed-word layout, which is a type definition) or
:mod:`canon`.  Matrices cross the boundary as :class:`SO6Matrix` values.

* :class:`BigDyadic` does ring arithmetic on unbounded integers using a
  power-of-two denominator internally and converts to the reduced
  ``(a, b, c)`` form only on output.
* :func:`naive_canon` / :func:`naive_equivalent` enumerate every signed row
  permutation with numpy and minimise the right action by sorting columns.
* :func:`naive_bfs` enumerates every word of length <= 4 without quotienting.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .so6 import N, SO6Matrix

VARIANTS = ("o6", "so6")

_FIELD = 26
_FIELD_MASK = (1 << _FIELD) - 1
_FIELD_LIMIT = 1 << (_FIELD - 1)


class OracleRangeError(ValueError):
    """A BigDyadic value does not fit the packed 26/26/12-bit word."""


# ---------------------------------------------------------------------------
# big-integer dyadic numbers


@dataclass(frozen=True)
class BigDyadic:
    """Reduced ``(a + b sqrt2) / sqrt2**c`` with unbounded ``a``, ``b``, ``c``."""

    a: int
    b: int
    c: int

    @staticmethod
    def make(a: int, b: int, c: int) -> BigDyadic:
        # move to a power-of-two denominator first, then normalise
        if c & 1:
            a, b, c = 2 * b, a, c + 1
        return BigDyadic._from_half(a, b, c // 2)

    @staticmethod
    def _from_half(p: int, q: int, k: int) -> BigDyadic:
        """Value ``(p + q sqrt2) / 2**k``."""
        if p == 0 and q == 0:
            return BigDyadic(0, 0, 0)
        while k > 0 and p % 2 == 0 and q % 2 == 0:
            p //= 2
            q //= 2
            k -= 1
        # now (p, q, 2k); one more sqrt2 division is possible when p is even
        a, b, c = p, q, 2 * k
        if c > 0 and a % 2 == 0:
            a, b, c = b, a // 2, c - 1
        return BigDyadic(a, b, c)

    def _half(self) -> tuple[int, int, int]:
        a, b, c = self.a, self.b, self.c
        if c & 1:
            a, b, c = 2 * b, a, c + 1
        return a, b, c // 2

    def __add__(self, other: BigDyadic) -> BigDyadic:
        p1, q1, k1 = self._half()
        p2, q2, k2 = other._half()
        k = max(k1, k2)
        return BigDyadic._from_half(p1 * 2 ** (k - k1) + p2 * 2 ** (k - k2),
                                    q1 * 2 ** (k - k1) + q2 * 2 ** (k - k2), k)

    def __neg__(self) -> BigDyadic:
        return BigDyadic(-self.a, -self.b, self.c)

    def __sub__(self, other: BigDyadic) -> BigDyadic:
        return self + (-other)

    def __mul__(self, other: BigDyadic) -> BigDyadic:
        p1, q1, k1 = self._half()
        p2, q2, k2 = other._half()
        return BigDyadic._from_half(p1 * p2 + 2 * q1 * q2, p1 * q2 + q1 * p2, k1 + k2)

    def twist(self) -> BigDyadic:
        # a power-of-two denominator is fixed by sqrt2 -> -sqrt2
        p, q, k = self._half()
        return BigDyadic._from_half(p, -q, k)

    def div_sqrt2(self) -> BigDyadic:
        return BigDyadic.make(self.a, self.b, self.c + 1)

    def value(self) -> float:
        return (self.a + self.b * math.sqrt(2)) / math.sqrt(2) ** self.c

    @staticmethod
    def from_word(w: int) -> BigDyadic:
        a = w & _FIELD_MASK
        b = (w >> _FIELD) & _FIELD_MASK
        c = w >> (2 * _FIELD)
        if a >= _FIELD_LIMIT:
            a -= 1 << _FIELD
        if b >= _FIELD_LIMIT:
            b -= 1 << _FIELD
        return BigDyadic.make(a, b, c)

    def to_word(self) -> int:
        a, b, c = self.a, self.b, self.c
        if not (-_FIELD_LIMIT <= a < _FIELD_LIMIT and -_FIELD_LIMIT <= b < _FIELD_LIMIT and 0 <= c < 4096):
            raise OracleRangeError(f"({a}, {b}, {c}) does not fit a packed word")
        return (a & _FIELD_MASK) | ((b & _FIELD_MASK) << _FIELD) | (c << (2 * _FIELD))


def big_matmul(A: SO6Matrix, B: SO6Matrix) -> SO6Matrix:
    """Textbook triple loop over BigDyadic entries."""
    a = [[BigDyadic.from_word(A.word(r, c)) for c in range(N)] for r in range(N)]
    b = [[BigDyadic.from_word(B.word(r, c)) for c in range(N)] for r in range(N)]
    zero = BigDyadic(0, 0, 0)
    ent = []
    for c in range(N):
        for r in range(N):
            s = zero
            for k in range(N):
                s = s + a[r][k] * b[k][c]
            ent.append(s.to_word())
    return SO6Matrix(ent)


# ---------------------------------------------------------------------------
# numpy representation: U = (A + B sqrt2) / sqrt2**e with integer A, B


_OFF = 1 << 20
_C_SHIFT = 44
_A_SHIFT = 22


def _to_arrays(U: SO6Matrix) -> tuple[np.ndarray, np.ndarray, int]:
    vals = [[BigDyadic.from_word(U.word(r, c)) for c in range(N)] for r in range(N)]
    e = max(v.c for row in vals for v in row)
    A = np.zeros((N, N), dtype=np.int64)
    B = np.zeros((N, N), dtype=np.int64)
    for r in range(N):
        for c in range(N):
            v = vals[r][c]
            a, b = v.a, v.b
            gap = e - v.c
            if gap & 1:
                a, b = 2 * b, a
            A[r, c] = a << (gap >> 1)
            B[r, c] = b << (gap >> 1)
    return A, B, e


def _reduce_common(A: np.ndarray, B: np.ndarray, e: np.ndarray):
    """Lower each matrix's common exponent while every A entry is even."""
    A, B, e = A.copy(), B.copy(), e.copy()
    while True:
        m = (e > 0) & np.all(A % 2 == 0, axis=(1, 2))
        if not m.any():
            return A, B, e
        A[m], B[m] = B[m], A[m] // 2
        e[m] -= 1


def _entry_fields(A: np.ndarray, B: np.ndarray, e: np.ndarray):
    """Per-entry reduced (a, b, c) arrays."""
    a = A.copy()
    b = B.copy()
    c = np.broadcast_to(e.reshape((-1,) + (1,) * (A.ndim - 1)), A.shape).copy()
    zero = (a == 0) & (b == 0)
    c[zero] = 0
    while True:
        m = (c > 0) & (a % 2 == 0)
        if not m.any():
            break
        a_new = np.where(m, b, a)
        b_new = np.where(m, a // 2, b)
        a, b = a_new, b_new
        c = c - m
    return a, b, c


def _keys(a, b, c) -> np.ndarray:
    if np.any(np.abs(a) >= _OFF) or np.any(np.abs(b) >= _OFF) or np.any(c >= 1 << 19):
        raise OracleRangeError("coefficients too large for the oracle key encoding")
    return (c.astype(np.int64) << _C_SHIFT) | ((a + _OFF) << _A_SHIFT) | (b + _OFF)


def _key_to_word(k: int) -> int:
    c = k >> _C_SHIFT
    a = ((k >> _A_SHIFT) & ((1 << 22) - 1)) - _OFF
    b = (k & ((1 << 22) - 1)) - _OFF
    return BigDyadic(a, b, c).to_word()


@lru_cache(maxsize=None)
def _row_actions(variant: str):
    """Arrays (src, sign, det) for every signed row action P1.

    Row ``r`` of ``P1 @ W`` is ``sign[r] * W[src[r]]``.
    """
    src, sgn, dets = [], [], []
    for perm in itertools.permutations(range(N)):
        inv = [0] * N
        for i, p in enumerate(perm):
            inv[p] = i
        par = sum(1 for i in range(N) for j in range(i + 1, N) if perm[i] > perm[j]) & 1
        for bits in range(64):
            s = [(-1 if bits >> i & 1 else 1) for i in range(N)]
            d = (-1 if par else 1) * math.prod(s)
            if variant == "so6" and d != 1:
                continue
            src.append(inv)
            sgn.append([s[inv[r]] for r in range(N)])
            dets.append(d)
    return np.array(src), np.array(sgn, dtype=np.int64), np.array(dets)


def _act_rows(A: np.ndarray, B: np.ndarray, variant: str):
    src, sgn, _ = _row_actions(variant)
    return A[src] * sgn[:, :, None], B[src] * sgn[:, :, None]


def _right_normal(A: np.ndarray, B: np.ndarray, e: np.ndarray, variant: str) -> np.ndarray:
    """Minimal element of each matrix's right orbit, as keys ``[n, col, row]``."""
    a, b, c = _entry_fields(A, B, e)
    K, KN = _keys(a, b, c), _keys(-a, -b, c)
    return _normal_from_keys(K, KN, (a != 0) | (b != 0), variant, np.union1d(K, KN))


def _normal_from_keys(K: np.ndarray, KN: np.ndarray, nz: np.ndarray, variant: str,
                      alphabet: np.ndarray) -> np.ndarray:
    """Right-orbit minimum from per-entry keys of ``x`` and ``-x`` (shape ``[n, row, col]``).

    ``alphabet`` is the sorted set of every key that can occur.
    """
    first = np.argmax(nz, axis=1)  # first nonzero row per column, shape (n, 6)
    n = K.shape[0]
    idx = np.arange(n)[:, None]
    cols = np.arange(N)[None, :]
    flip = KN[idx, first, cols] < K[idx, first, cols]
    NK = np.where(flip[:, None, :], KN, K)  # normalised, [n, row, col]
    NKneg = np.where(flip[:, None, :], K, KN)
    # lexicographic order of columns via dense per-call ranks
    ranks = np.searchsorted(alphabet, NK)
    bits = max(1, int(len(alphabet) - 1).bit_length())
    if bits * N > 63:
        raise OracleRangeError("too many distinct entries for the column encoding")
    code = np.zeros((n, N), dtype=np.int64)
    for r in range(N):
        code = (code << bits) | ranks[:, r, :]
    if variant == "o6":
        # columns are distinct, so sorting the codes and decoding them is enough
        code = np.sort(code, axis=1)
        out = np.empty((n, N, N), dtype=np.int64)
        mask = (1 << bits) - 1
        for r in range(N):
            out[:, :, r] = alphabet[(code >> (bits * (N - 1 - r))) & mask]
        return out
    order = np.argsort(code, axis=1, kind="stable")
    cm = np.transpose(NK, (0, 2, 1))  # [n, col, row]
    cmneg = np.transpose(NKneg, (0, 2, 1))
    out = cm[idx, order]
    if variant == "so6":
        # det of the right action: parity of the sort times the sign flips
        par = np.zeros(n, dtype=np.int64)
        for i in range(N):
            for j in range(i + 1, N):
                par ^= (order[:, i] > order[:, j]).astype(np.int64)
        d = np.where(par == 1, -1, 1) * np.where(flip.sum(axis=1) % 2 == 1, -1, 1)
        bad = d < 0
        last = order[:, N - 1]
        out[bad, N - 1] = cmneg[np.arange(n)[bad], last[bad]]
    return out


def _lexmin(forms: np.ndarray) -> int:
    flat = forms.reshape(forms.shape[0], -1)
    return int(np.lexsort(flat.T[::-1])[0])


def _forms_to_matrix(form: np.ndarray) -> SO6Matrix:
    return SO6Matrix([_key_to_word(int(k)) for k in form.reshape(-1)])


def _orbit_forms(U: SO6Matrix, variant: str) -> np.ndarray:
    # a row action only moves and negates entries, so key every entry once
    f = [[BigDyadic.from_word(U.word(r, c)) for c in range(N)] for r in range(N)]
    a = np.array([[v.a for v in row] for row in f], dtype=np.int64)
    b = np.array([[v.b for v in row] for row in f], dtype=np.int64)
    c = np.array([[v.c for v in row] for row in f], dtype=np.int64)
    K, KN, nz = _keys(a, b, c), _keys(-a, -b, c), (a != 0) | (b != 0)
    src, sgn, _ = _row_actions(variant)
    pos = (sgn > 0)[:, :, None]
    return _normal_from_keys(np.where(pos, K[src], KN[src]), np.where(pos, KN[src], K[src]), nz[src], variant,
                             np.union1d(K, KN))


def naive_canon(U: SO6Matrix, variant: str = "o6") -> SO6Matrix:
    """Lexicographic minimum of the orbit of U, by exhaustion over row actions."""
    forms = _orbit_forms(U, variant)
    return _forms_to_matrix(forms[_lexmin(forms)])


def naive_equivalent(U: SO6Matrix, V: SO6Matrix, variant: str = "o6") -> bool:
    forms = _orbit_forms(U, variant)
    A, B, e = _to_arrays(V)
    fv = _right_normal(A[None], B[None], np.array([e]), variant)[0]
    if forms.shape[1:] != fv.shape:
        return False
    return bool(np.any(np.all(forms == fv, axis=(1, 2))))


# ---------------------------------------------------------------------------
# unquotiented breadth-first enumeration

_H_MUL = np.uint64(0x9E3779B97F4A7C15)


def _hash_forms(forms: np.ndarray) -> np.ndarray:
    flat = forms.reshape(forms.shape[0], -1).astype(np.uint64)
    h = np.full(flat.shape[0], np.uint64(0xCBF29CE484222325))
    with np.errstate(over="ignore"):
        for i in range(flat.shape[1]):
            h = (h ^ flat[:, i]) * _H_MUL
            h ^= h >> np.uint64(29)
    return h


def _apply_all_generators(A: np.ndarray, B: np.ndarray, e: np.ndarray):
    """Every X(i,j) applied to every matrix: rows i, j -> (Ui + Uj, Ui - Uj) / sqrt2."""
    outA, outB, oute = [], [], []
    for i, j in itertools.combinations(range(N), 2):
        # untouched rows are rescaled to the new common denominator
        nA = 2 * B
        nB = A.copy()
        nA[:, i], nA[:, j] = A[:, i] + A[:, j], A[:, i] - A[:, j]
        nB[:, i], nB[:, j] = B[:, i] + B[:, j], B[:, i] - B[:, j]
        outA.append(nA)
        outB.append(nB)
        oute.append(e + 1)
    return _reduce_common(np.concatenate(outA), np.concatenate(outB), np.concatenate(oute))


def _row_bytes(A, B, e) -> np.ndarray:
    n = A.shape[0]
    return np.concatenate([e.reshape(n, 1), A.reshape(n, -1), B.reshape(n, -1)], axis=1)


def naive_bfs(root: SO6Matrix, k: int, variant: str = "o6") -> list[set[SO6Matrix]]:
    """Classes at each minimal distance 0..k from ``root`` (k <= 4).

    Every word over the 15 involutive generators is enumerated as a plain
    matrix product (exact duplicates are merged); classes are identified by
    hashing right-normal forms against the full row orbit of each class
    representative, with every hash hit re-verified exactly.
    """
    if k > 4:
        raise ValueError("naive_bfs is limited to k <= 4")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    A0, B0, e0 = _to_arrays(root)
    A, B, e = _reduce_common(A0[None], B0[None], np.array([e0]))
    seen = {r.tobytes() for r in _row_bytes(A, B, e)}

    reps: list[tuple[np.ndarray, np.ndarray, int]] = []
    rep_hash: list[tuple[np.ndarray, np.ndarray]] = []  # (sorted hashes, action index)
    dist: list[int] = []

    def classify(A, B, e, d):
        forms = _right_normal(A, B, e, variant)
        hashes = _hash_forms(forms)
        todo = np.ones(len(hashes), dtype=bool)
        for cid in range(len(reps)):
            _assign(cid, forms, hashes, todo)
        while todo.any():
            i = int(np.argmax(todo))
            ra, rb, re_ = A[i], B[i], int(e[i])
            IA, IB = _act_rows(ra, rb, variant)
            of = _right_normal(IA, IB, np.full(IA.shape[0], re_, dtype=np.int64), variant)
            oh = _hash_forms(of)
            order = np.argsort(oh, kind="stable")
            reps.append((ra, rb, re_))
            rep_hash.append((oh[order], order))
            dist.append(d)
            _assign(len(reps) - 1, forms, hashes, todo)
            if todo[i]:
                raise AssertionError("class representative not found in its own orbit")

    def _assign(cid, forms, hashes, todo):
        sh, order = rep_hash[cid]
        cand = np.nonzero(todo)[0]
        pos = np.searchsorted(sh, hashes[cand])
        pos = np.minimum(pos, len(sh) - 1)
        hit = sh[pos] == hashes[cand]
        if not hit.any():
            return
        cand = cand[hit]
        act = order[pos[hit]]
        ra, rb, re_ = reps[cid]
        src, sgn, _ = _row_actions(variant)
        IA = ra[src[act]] * sgn[act][:, :, None]
        IB = rb[src[act]] * sgn[act][:, :, None]
        check = _right_normal(IA, IB, np.full(len(act), re_, dtype=np.int64), variant)
        ok = np.all(check == forms[cand], axis=(1, 2))
        todo[cand[ok]] = False

    classify(A, B, e, 0)
    for d in range(1, k + 1):
        A, B, e = _apply_all_generators(A, B, e)
        rows = _row_bytes(A, B, e)
        _, first = np.unique(rows, axis=0, return_index=True)
        keep = [i for i in sorted(first) if rows[i].tobytes() not in seen]
        A, B, e = A[keep], B[keep], e[keep]
        seen.update(r.tobytes() for r in _row_bytes(A, B, e))
        classify(A, B, e, d)

    layers: list[set[SO6Matrix]] = [set() for _ in range(k + 1)]
    for (ra, rb, re_), d in zip(reps, dist):
        IA, IB = _act_rows(ra, rb, variant)
        forms = _right_normal(IA, IB, np.full(IA.shape[0], re_, dtype=np.int64), variant)
        layers[d].add(_forms_to_matrix(forms[_lexmin(forms)]))
    return layers


# ---------------------------------------------------------------------------
# frozen test vectors

GATE_PAIRS = (("T0", "T1", True), ("T0", "I", False), ("CZ", "I", True), ("H0", "I", True),
              ("S1", "I", True), ("T1", "CZ", False))


def random_big(rng, bits: int = 10, max_c: int = 24) -> BigDyadic:
    """Random reduced value with small coefficients (zero included now and then)."""
    if rng.random() < 0.05:
        return BigDyadic(0, 0, 0)
    lim = 1 << bits
    return BigDyadic.make(rng.randrange(-lim, lim), rng.randrange(-lim, lim), rng.randrange(max_c + 1))


def _triple(x: BigDyadic) -> list[int]:
    return [x.a, x.b, x.c]


def build_vectors(seed: int = 2024, bfs_depth: int = 4) -> dict:
    """Reference values for the test suite, computed only with oracle code.

    Random matrices come from products of explicit generator matrices formed
    by :func:`big_matmul`; class data comes from :func:`naive_canon` and
    :func:`naive_bfs`.
    """
    import random

    from .so6 import PAIRS, gate_image, generator

    rng = random.Random(seed)
    out: dict = {"seed": seed}

    reduce_cases = [(0, 0, 5), (1, 1, 0), (2, 2, 2), (4, 0, 4), (0, 3, 1), (-6, 2, 3)]
    out["reduce"] = [{"in": list(t), "out": _triple(BigDyadic.make(*t))} for t in reduce_cases]

    fixed = [("add", (1, 0, 1), (1, 0, 0)), ("add", (1, 0, 1), (1, 0, 1)),
             ("mul", (1, 1, 0), (-1, 1, 0)), ("mul", (1, 0, 1), (1, 0, 1)),
             ("div_sqrt2", (0, 1, 0), None), ("div_sqrt2", (1, 0, 0), None), ("twist", (1, 1, 0), None)]
    ops = []
    for op, x, y in fixed:
        ops.append((op, BigDyadic.make(*x), None if y is None else BigDyadic.make(*y)))
    for _ in range(1000):
        op = rng.choice(("add", "sub", "mul", "twist", "div_sqrt2", "neg"))
        ops.append((op, random_big(rng), random_big(rng) if op in ("add", "sub", "mul") else None))
    vec = []
    for op, x, y in ops:
        if op == "add":
            r = x + y
        elif op == "sub":
            r = x - y
        elif op == "mul":
            r = x * y
        elif op == "twist":
            r = x.twist()
        elif op == "neg":
            r = -x
        else:
            r = x.div_sqrt2()
        vec.append({"op": op, "x": _triple(x), "y": None if y is None else _triple(y), "out": _triple(r)})
    out["dyadic"] = vec

    words = []
    ident = SO6Matrix.identity()
    for _ in range(40):
        steps = [rng.randrange(len(PAIRS)) for _ in range(rng.randint(0, 7))]
        M = ident
        for g in reversed(steps):
            M = big_matmul(generator(g), M)
        words.append({"word": " ".join("X({},{})".format(*PAIRS[g]) for g in steps),
                      "matrix": list(M.entries), "canon": list(naive_canon(M).entries)})
    out["words"] = words

    def named(name):
        return ident if name == "I" else gate_image(name)

    out["equivalent"] = [{"a": a, "b": b, "equivalent": naive_equivalent(named(a), named(b))}
                         for a, b, _expected in GATE_PAIRS]
    out["gate_canon"] = {g: list(naive_canon(named(g)).entries) for g in ("I", "T0", "CZ")}

    out["bfs"] = {}
    for variant in VARIANTS:
        layers = naive_bfs(ident, bfs_depth, variant)
        out["bfs"][variant] = {"counts": [len(s) for s in layers],
                               "classes": [sorted(list(m.entries) for m in s) for s in layers]}
    return out
