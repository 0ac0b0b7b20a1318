"""6x6 exact orthogonal matrices over Z[1/sqrt2], signed permutations and T-steps.

Matrices store their 36 entries as packed dyadic words in a flat tuple in
column-major order (``entries[col * 6 + row]``).

Generators come in two families, both indexed by a coordinate pair
``1 <= i < j <= 6``:

* plain ``G(i,j)``: the T-gate rotation block ``[[1, -1], [1, 1]] / sqrt2``
  placed on coordinates ``(i, j)``;
* involutive ``X(i,j) = C(i,j) G(i,j)``: the block ``[[1, 1], [1, -1]] / sqrt2``,
  i.e. ``G(i,j)`` followed by the swap of rows ``i`` and ``j``.

The search engine only ever steps with ``X``; ``G`` exists so the gate-level
identities can be checked against the plain rotation family.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import dyadic as dy
from .errors import IntegrityError, InvalidMatrix

N = 6
ONE = dy.pack(1, 0, 0)
MINUS_ONE = dy.pack(-1, 0, 0)
INV_SQRT2 = dy.pack(1, 0, 1)
MINUS_INV_SQRT2 = dy.pack(-1, 0, 1)

PAIRS: tuple[tuple[int, int], ...] = tuple(itertools.combinations(range(1, N + 1), 2))
PAIR_ID = {p: k for k, p in enumerate(PAIRS)}
NUM_GENERATORS = len(PAIRS)


# ---------------------------------------------------------------------------
# matrices


class SO6Matrix:
    """Immutable 6x6 matrix of packed dyadic words, column-major."""

    __slots__ = ("entries", "_sig")

    def __init__(self, entries: Sequence[int]):
        if len(entries) != N * N:
            raise InvalidMatrix(f"expected 36 entries, got {len(entries)}")
        self.entries = tuple(entries)
        self._sig = None

    @classmethod
    def identity(cls) -> SO6Matrix:
        return _IDENTITY

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> SO6Matrix:
        """Build from row-major data; items may be packed words, ``Dyadic`` or (a, b, c)."""
        if len(rows) != N or any(len(r) != N for r in rows):
            raise InvalidMatrix("expected 6 rows of 6 entries")
        ent = [0] * (N * N)
        for r, row in enumerate(rows):
            for c, x in enumerate(row):
                ent[c * N + r] = _as_word(x)
        return cls(ent)

    def word(self, r: int, c: int) -> int:
        return self.entries[c * N + r]

    def __getitem__(self, rc: tuple[int, int]) -> dy.Dyadic:
        r, c = rc
        return dy.Dyadic.from_word(self.entries[c * N + r])

    def rows(self) -> list[tuple[int, ...]]:
        e = self.entries
        return [tuple(e[c * N + r] for c in range(N)) for r in range(N)]

    def columns(self) -> list[tuple[int, ...]]:
        e = self.entries
        return [e[c * N:(c + 1) * N] for c in range(N)]

    def transpose(self) -> SO6Matrix:
        e = self.entries
        return SO6Matrix([e[r * N + c] for c in range(N) for r in range(N)])

    def max_exponent(self) -> int:
        return max(w >> dy.C_SHIFT for w in self.entries)

    def to_float(self) -> list[list[float]]:
        return [[dy.to_float(w) for w in row] for row in self.rows()]

    def __eq__(self, other) -> bool:
        return isinstance(other, SO6Matrix) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        rows = ["[" + " ".join(str(dy.Dyadic.from_word(w)) for w in row) + "]" for row in self.rows()]
        return "SO6Matrix(" + ", ".join(rows) + ")"


def _as_word(x) -> int:
    if isinstance(x, dy.Dyadic):
        return x.word
    if isinstance(x, tuple):
        return dy.reduce(*x)
    if isinstance(x, int):
        return x  # already a packed word
    raise TypeError(f"cannot interpret {x!r} as a dyadic entry")


_IDENTITY = SO6Matrix([ONE if r == c else 0 for c in range(N) for r in range(N)])


def _numerators(entries: Sequence[int]) -> tuple[int, list[tuple[int, int]]]:
    """Common exponent ``e`` and Z[sqrt2] numerators with ``x = n / sqrt2**e``."""
    e = max(w >> dy.C_SHIFT for w in entries)
    out = []
    for w in entries:
        a, b, c = dy.unpack(w)
        gap = e - c
        if gap & 1:
            a, b = 2 * b, a
        m = gap >> 1
        out.append((a << m, b << m))
    return e, out


def _zmul(x: tuple[int, int], y: tuple[int, int]) -> tuple[int, int]:
    return (x[0] * y[0] + 2 * x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def mat_mul(A: SO6Matrix, B: SO6Matrix) -> SO6Matrix:
    ea, na = _numerators(A.entries)
    eb, nb = _numerators(B.entries)
    out = []
    for c in range(N):
        for r in range(N):
            sa = sb = 0
            for k in range(N):
                x = na[k * N + r]
                y = nb[c * N + k]
                sa += x[0] * y[0] + 2 * x[1] * y[1]
                sb += x[0] * y[1] + x[1] * y[0]
            out.append(dy.reduce(sa, sb, ea + eb))
    return SO6Matrix(out)


def transpose(A: SO6Matrix) -> SO6Matrix:
    return A.transpose()


def det(A: SO6Matrix) -> int:
    """Exact determinant, which must be +1 or -1.

    Uses cofactor expansion memoised over column subsets on the integer
    numerators, so no division is ever needed.
    """
    e, nums = _numerators(A.entries)
    memo: dict[int, tuple[int, int]] = {0: (1, 0)}

    # minor(rows r..5, columns in mask) where |mask| == 6 - r
    def minor(mask: int, r: int) -> tuple[int, int]:
        got = memo.get(mask)
        if got is not None:
            return got
        sa = sb = 0
        sign = 1
        for c in range(N):
            bit = 1 << c
            if not mask & bit:
                continue
            x = nums[c * N + r]
            if x != (0, 0):
                m = minor(mask & ~bit, r + 1)
                p = _zmul(x, m)
                sa += sign * p[0]
                sb += sign * p[1]
            sign = -sign
        memo[mask] = (sa, sb)
        return sa, sb

    da, db = minor((1 << N) - 1, 0)
    w = dy.reduce(da, db, N * e) if (da, db) != (0, 0) else 0
    if w == ONE:
        return 1
    if w == MINUS_ONE:
        return -1
    raise InvalidMatrix(f"determinant is {dy.Dyadic.from_word(w)}, not +-1")


def is_orthogonal(A: SO6Matrix) -> bool:
    e, nums = _numerators(A.entries)
    scale = 1 << e  # sqrt2**(2e)
    for r1 in range(N):
        for r2 in range(r1, N):
            sa = sb = 0
            for c in range(N):
                x = nums[c * N + r1]
                y = nums[c * N + r2]
                sa += x[0] * y[0] + 2 * x[1] * y[1]
                sb += x[0] * y[1] + x[1] * y[0]
            if sb != 0 or sa != (scale if r1 == r2 else 0):
                return False
    return True


def validate(A: SO6Matrix) -> int:
    """Check every matrix invariant; return the determinant or raise."""
    for idx, w in enumerate(A.entries):
        if w >> 64:
            raise InvalidMatrix(f"entry {idx} does not fit a 64-bit word")
        a, b, c = dy.unpack(w)
        r, col = idx % N, idx // N
        if not dy.is_reduced(a, b, c):
            raise InvalidMatrix(f"entry ({r + 1},{col + 1}) = {a},{b},{c} is not reduced")
        if not dy.in_unit_interval(w):
            raise InvalidMatrix(f"entry ({r + 1},{col + 1}) = {a},{b},{c} lies outside [-1, 1]")
    if not is_orthogonal(A):
        raise InvalidMatrix("matrix is not orthogonal")
    return det(A)


# ---------------------------------------------------------------------------
# signed permutations

_FACT = [1, 1, 2, 6, 24, 120, 720]


def lehmer_rank(perm: Sequence[int]) -> int:
    rank = 0
    n = len(perm)
    for i in range(n):
        smaller = sum(1 for j in range(i + 1, n) if perm[j] < perm[i])
        rank += smaller * _FACT[n - 1 - i]
    return rank


def lehmer_unrank(rank: int, n: int = N) -> tuple[int, ...]:
    if not 0 <= rank < _FACT[n]:
        raise ValueError(f"rank {rank} out of range for S_{n}")
    pool = list(range(n))
    out = []
    for i in range(n):
        f = _FACT[n - 1 - i]
        out.append(pool.pop(rank // f))
        rank %= f
    return tuple(out)


@dataclass(frozen=True)
class SignedPerm:
    """The matrix sending ``e_i`` to ``signs[i] * e_{perm[i]}`` (0-based)."""

    perm: tuple[int, ...]
    signs: tuple[int, ...]

    @classmethod
    def identity(cls) -> SignedPerm:
        return _SP_IDENTITY

    @classmethod
    def from_code(cls, code: int) -> SignedPerm:
        rank, bits = divmod(code, 64)
        signs = tuple(-1 if bits >> i & 1 else 1 for i in range(N))
        return cls(lehmer_unrank(rank), signs)

    @classmethod
    def from_matrix(cls, A: SO6Matrix) -> SignedPerm | None:
        perm = [0] * N
        signs = [1] * N
        for c, col in enumerate(A.columns()):
            hits = [(r, w) for r, w in enumerate(col) if w]
            if len(hits) != 1 or hits[0][1] not in (ONE, MINUS_ONE):
                return None
            perm[c] = hits[0][0]
            signs[c] = 1 if hits[0][1] == ONE else -1
        if sorted(perm) != list(range(N)):
            return None
        return cls(tuple(perm), tuple(signs))

    @classmethod
    def random(cls, rng: random.Random) -> SignedPerm:
        perm = list(range(N))
        rng.shuffle(perm)
        return cls(tuple(perm), tuple(rng.choice((1, -1)) for _ in range(N)))

    @property
    def rank(self) -> int:
        return lehmer_rank(self.perm)

    @property
    def sign_bits(self) -> int:
        return sum(1 << i for i, s in enumerate(self.signs) if s < 0)

    @property
    def code(self) -> int:
        """Dense id in ``0 .. 46079``: Lehmer rank * 64 + sign bits."""
        return self.rank * 64 + self.sign_bits

    def compose(self, other: SignedPerm) -> SignedPerm:
        """Matrix product ``self @ other``."""
        p, s = self.perm, self.signs
        return SignedPerm(tuple(p[q] for q in other.perm),
                          tuple(s[q] * t for q, t in zip(other.perm, other.signs)))

    def __matmul__(self, other: SignedPerm) -> SignedPerm:
        return self.compose(other)

    def inverse(self) -> SignedPerm:
        perm = [0] * N
        signs = [1] * N
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            perm[p] = i
            signs[p] = s
        return SignedPerm(tuple(perm), tuple(signs))

    def det(self) -> int:
        inversions = sum(1 for i in range(N) for j in range(i + 1, N) if self.perm[i] > self.perm[j])
        d = -1 if inversions & 1 else 1
        for s in self.signs:
            d *= s
        return d

    def matrix(self) -> SO6Matrix:
        ent = [0] * (N * N)
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            ent[i * N + p] = ONE if s > 0 else MINUS_ONE
        return SO6Matrix(ent)

    def act_left(self, A: SO6Matrix) -> SO6Matrix:
        """``self @ A``: row ``i`` of ``A`` moves to row ``perm[i]``, times ``signs[i]``."""
        e = A.entries
        out = [0] * (N * N)
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            for c in range(0, N * N, N):
                w = e[c + i]
                out[c + p] = w if s > 0 else dy.neg(w)
        return SO6Matrix(out)

    def act_right(self, A: SO6Matrix) -> SO6Matrix:
        """``A @ self``: column ``k`` of the result is ``signs[k] * A[:, perm[k]]``."""
        e = A.entries
        out: list[int] = []
        for k, (p, s) in enumerate(zip(self.perm, self.signs)):
            col = e[p * N:(p + 1) * N]
            out.extend(col if s > 0 else [dy.neg(w) for w in col])
        return SO6Matrix(out)

    def __str__(self) -> str:
        return "P[" + " ".join(str(p + 1) for p in self.perm) + "; " + \
            " ".join("+" if s > 0 else "-" for s in self.signs) + "]"


_SP_IDENTITY = SignedPerm(tuple(range(N)), (1,) * N)


def sp_compose(p: SignedPerm, q: SignedPerm) -> SignedPerm:
    return p.compose(q)


def sp_invert(p: SignedPerm) -> SignedPerm:
    return p.inverse()


def sp_det(p: SignedPerm) -> int:
    return p.det()


def sp_act_left(p: SignedPerm, A: SO6Matrix) -> SO6Matrix:
    return p.act_left(A)


def sp_act_right(A: SO6Matrix, p: SignedPerm) -> SO6Matrix:
    return p.act_right(A)


def all_signed_perms() -> Iterable[SignedPerm]:
    for code in range(_FACT[N] * 64):
        yield SignedPerm.from_code(code)


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class GenIndex:
    """Coordinate pair ``1 <= i < j <= 6`` plus the plain/involutive flag."""

    i: int
    j: int
    involutive: bool = True

    def __post_init__(self):
        if not 1 <= self.i < self.j <= N:
            raise ValueError(f"bad generator pair ({self.i},{self.j})")

    @classmethod
    def from_id(cls, gid: int, involutive: bool = True) -> GenIndex:
        i, j = PAIRS[gid]
        return cls(i, j, involutive)

    @property
    def id(self) -> int:
        return PAIR_ID[(self.i, self.j)]

    def __str__(self) -> str:
        return f"{'X' if self.involutive else 'G'}({self.i},{self.j})"


_BUTTERFLY: dict[tuple[int, int], tuple[int, int]] = {}
_BUTTERFLY_LIMIT = 1 << 21


def _butterfly(x: int, y: int) -> tuple[int, int]:
    """``((x + y)/sqrt2, (x - y)/sqrt2)``, memoised on the packed words."""
    key = (x, y)
    r = _BUTTERFLY.get(key)
    if r is None:
        if len(_BUTTERFLY) >= _BUTTERFLY_LIMIT:
            _BUTTERFLY.clear()
        r = (dy.div_sqrt2(dy.add(x, y)), dy.div_sqrt2(dy.sub(x, y)))
        _BUTTERFLY[key] = r
    return r


def _make_kernel(i: int, j: int, involutive: bool):
    slots = tuple((c * N + i, c * N + j) for c in range(N))
    cache = _BUTTERFLY
    bf = _butterfly

    if involutive:
        def kernel(e: tuple[int, ...]) -> tuple[int, ...]:
            out = list(e)
            for pi, pj in slots:
                r = cache.get((e[pi], e[pj])) or bf(e[pi], e[pj])
                out[pi] = r[0]
                out[pj] = r[1]
            return tuple(out)
    else:
        def kernel(e: tuple[int, ...]) -> tuple[int, ...]:
            out = list(e)
            for pi, pj in slots:
                r = cache.get((e[pi], e[pj])) or bf(e[pi], e[pj])
                out[pi] = r[1]
                out[pj] = r[0]
            return tuple(out)
    return kernel


# dispatch tables indexed by dense generator id
X_KERNELS = tuple(_make_kernel(i - 1, j - 1, True) for i, j in PAIRS)
G_KERNELS = tuple(_make_kernel(i - 1, j - 1, False) for i, j in PAIRS)


def apply_gen(g: GenIndex | int, U: SO6Matrix) -> SO6Matrix:
    """``generator(g) @ U``, touching only rows ``i`` and ``j``.

    An ``int`` is taken as the dense id of an involutive generator.
    """
    if isinstance(g, int):
        return SO6Matrix(X_KERNELS[g](U.entries))
    table = X_KERNELS if g.involutive else G_KERNELS
    return SO6Matrix(table[g.id](U.entries))


def generator(g: GenIndex | int) -> SO6Matrix:
    if isinstance(g, int):
        g = GenIndex.from_id(g)
    i, j = g.i - 1, g.j - 1
    ent = [ONE if r == c else 0 for c in range(N) for r in range(N)]
    ent[i * N + i] = INV_SQRT2
    ent[j * N + j] = MINUS_INV_SQRT2 if g.involutive else INV_SQRT2
    ent[j * N + i] = INV_SQRT2 if g.involutive else MINUS_INV_SQRT2
    ent[i * N + j] = INV_SQRT2
    return SO6Matrix(ent)


def _signed_perm_rows(rows: Sequence[Sequence[int]]) -> SO6Matrix:
    return SO6Matrix.from_rows([[dy.reduce(x, 0, 0) for x in row] for row in rows])


_T_BLOCK = ((INV_SQRT2, MINUS_INV_SQRT2), (INV_SQRT2, INV_SQRT2))


def _rot_image(i: int, j: int) -> SO6Matrix:
    rows = [[ONE if r == c else 0 for c in range(N)] for r in range(N)]
    rows[i][i], rows[i][j] = _T_BLOCK[0]
    rows[j][i], rows[j][j] = _T_BLOCK[1]
    return SO6Matrix.from_rows(rows)


GATE_NAMES = ("H0", "H1", "S0", "S1", "T0", "T1", "CZ")

_GATES = {
    "H0": _signed_perm_rows([
        [0, 0, 1, 0, 0, 0], [0, -1, 0, 0, 0, 0], [1, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 0, 1]]),
    "S0": _signed_perm_rows([
        [0, -1, 0, 0, 0, 0], [1, 0, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 0, 1]]),
    "T0": _rot_image(0, 1),
    "H1": _signed_perm_rows([
        [1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 0, 1], [0, 0, 0, 0, -1, 0], [0, 0, 0, 1, 0, 0]]),
    "S1": _signed_perm_rows([
        [1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, -1, 0], [0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 0, 1]]),
    "T1": _rot_image(3, 4),
    "CZ": _signed_perm_rows([
        [0, -1, 0, 0, 0, 0], [1, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, -1],
        [0, 0, 0, 0, -1, 0], [0, 0, 0, 1, 0, 0], [0, 0, 1, 0, 0, 0]]),
}


def gate_image(name: str) -> SO6Matrix:
    """SO(6) image of a two-qubit gate; suffix 0/1 selects the qubit."""
    try:
        return _GATES[name]
    except KeyError:
        raise ValueError(f"unknown gate {name!r}; expected one of {GATE_NAMES}") from None


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class Word:
    """``steps[0] @ steps[1] @ ... @ steps[-1] @ correction``."""

    steps: tuple[GenIndex, ...] = ()
    correction: SignedPerm = _SP_IDENTITY

    @property
    def tcount(self) -> int:
        return len(self.steps)

    def __str__(self) -> str:
        parts = [str(g) for g in self.steps]
        if self.correction != _SP_IDENTITY or not parts:
            parts.append(str(self.correction))
        return " ".join(parts)


def evaluate_word(w: Word) -> SO6Matrix:
    e = w.correction.matrix().entries
    for g in reversed(w.steps):
        table = X_KERNELS if g.involutive else G_KERNELS
        e = table[g.id](e)
    return SO6Matrix(e)


_PUSH: dict[tuple[SignedPerm, int], tuple[int, SignedPerm]] = {}


def push_through(p: SignedPerm, gid: int) -> tuple[int, SignedPerm]:
    """Rewrite ``p @ X(g)`` as ``X(g') @ q`` with ``q`` a signed permutation."""
    key = (p, gid)
    got = _PUSH.get(key)
    if got is not None:
        return got
    i, j = PAIRS[gid]
    a, b = sorted((p.perm[i - 1] + 1, p.perm[j - 1] + 1))
    gid2 = PAIR_ID[(a, b)]
    m = X_KERNELS[gid2](p.act_left(generator(gid)).entries)
    q = SignedPerm.from_matrix(SO6Matrix(m))
    if q is None:
        raise IntegrityError("generator conjugate did not reduce to a signed permutation")
    _PUSH[key] = (gid2, q)
    return gid2, q


_SWAPS = {gid: SignedPerm(tuple((j - 1 if k == i - 1 else i - 1 if k == j - 1 else k) for k in range(N)),
                          (1,) * N)
          for gid, (i, j) in enumerate(PAIRS)}


def normalize_factors(factors: Iterable[GenIndex | SignedPerm]) -> Word:
    """Exact rewrite of a product of generators and signed permutations as a Word.

    Signed permutations are pushed to the right through each generator; plain
    ``G(i,j)`` factors are expanded as ``C(i,j) X(i,j)``.
    """
    steps: list[GenIndex] = []
    pending = _SP_IDENTITY
    for f in factors:
        if isinstance(f, SignedPerm):
            pending = pending.compose(f)
            continue
        if not f.involutive:
            pending = pending.compose(_SWAPS[f.id])
        gid, pending = push_through(pending, f.id)
        steps.append(GenIndex.from_id(gid))
    return Word(tuple(steps), pending)


def random_word(length: int, rng: random.Random, *, no_repeat: bool = True) -> Word:
    """Random involutive word; ``no_repeat`` forbids immediate ``X X`` cancellation."""
    steps: list[GenIndex] = []
    last = -1
    for _ in range(length):
        gid = rng.randrange(NUM_GENERATORS)
        while no_repeat and gid == last:
            gid = rng.randrange(NUM_GENERATORS)
        steps.append(GenIndex.from_id(gid))
        last = gid
    return Word(tuple(steps), _SP_IDENTITY)
