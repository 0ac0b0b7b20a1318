"""Signatures and exact canonical forms under two-sided signed permutations.

Two matrices are equivalent when ``L U R = V`` for signed permutations ``L``
and ``R`` of either determinant.  The canonical form is the lexicographic
minimum of the orbit, scanning column-major and ordering entries by
``(c, a, b)``.

For a fixed left action the best right action is immediate (sign-normalise
each column, sort the columns), so the only real search is over rows.  We do
it column by column: keep every partial row arrangement that produces the
smallest prefix of columns, with rows grouped into ordered cells that are
still interchangeable.  Rows carrying a +-1 entry split off first as a -I
block in the top-left corner.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import dyadic as dy
from .so6 import MINUS_ONE, N, ONE, SignedPerm, SO6Matrix

_M64 = (1 << 64) - 1

# pinned hash constants; they are folded into the LUT file fingerprint
HASH_SEED = 0x243F6A8885A308D3
HASH_MUL1 = 0xBF58476D1CE4E5B9
HASH_MUL2 = 0x94D049BB133111EB
HASH_GOLDEN = 0x9E3779B97F4A7C15


def _mix(x: int) -> int:
    x &= _M64
    x = ((x ^ (x >> 30)) * HASH_MUL1) & _M64
    x = ((x ^ (x >> 27)) * HASH_MUL2) & _M64
    return x ^ (x >> 31)


def entry_key(w: int) -> int:
    """Word of ``w`` or ``-w``, whichever has a lexicographically positive (a, b)."""
    a, b, c = dy.unpack(w)
    if a < 0 or (a == 0 and b < 0):
        return dy.pack(-a, -b, c)
    return w


_EKEY: dict[int, int] = {}


def _ekey(w: int) -> int:
    k = _EKEY.get(w)
    if k is None:
        k = entry_key(w)
        _EKEY[w] = k
    return k


def _hash_multiset(keys: list[int]) -> int:
    h = HASH_SEED
    for k in sorted(keys):
        h = _mix(h ^ k) + HASH_GOLDEN
    return _mix(h)


def signature(U: SO6Matrix) -> int:
    """64-bit class invariant: equal on every orbit, usually distinct across orbits."""
    sig = U._sig
    if sig is not None:
        return sig
    e = [_ekey(w) for w in U.entries]
    col = _hash_multiset([_hash_multiset(e[c * N:(c + 1) * N]) for c in range(N)])
    row = _hash_multiset([_hash_multiset(e[r::N]) for r in range(N)])
    sig = _mix(col ^ _mix(row + HASH_GOLDEN))
    U._sig = sig
    return sig


# ---------------------------------------------------------------------------
# canonical form


@dataclass(frozen=True)
class CanonicalForm:
    """``matrix == left @ U @ right`` for the canonicalised input ``U``."""

    matrix: SO6Matrix
    left: SignedPerm
    right: SignedPerm


_KEYS: dict[int, tuple[int, int]] = {}
_UNKEY: dict[int, int] = {}
_KEYS_LIMIT = 1 << 20


def _key_pair(w: int) -> tuple[int, int]:
    got = _KEYS.get(w)
    if got is None:
        if len(_KEYS) >= _KEYS_LIMIT:
            _KEYS.clear()
        got = (dy.sort_key(w), dy.sort_key(dy.neg(w)))
        _KEYS[w] = got
    return got


def _unkey(k: int) -> int:
    w = _UNKEY.get(k)
    if w is None:
        if len(_UNKEY) >= _KEYS_LIMIT:
            _UNKEY.clear()
        w = dy.from_sort_key(k)
        _UNKEY[k] = w
    return w


_NEG_ONE_KEY = dy.sort_key(MINUS_ONE)


def _split_units(e: tuple[int, ...]):
    """Rows holding a +-1 entry, as (row, col, value) sorted by row."""
    units = []
    for idx, w in enumerate(e):
        if w == ONE or w == MINUS_ONE:
            units.append((idx % N, idx // N, 1 if w == ONE else -1))
    units.sort()
    return units


def _search(U: SO6Matrix, all_witnesses: bool = False):
    """Run the column-by-column search.

    Returns ``(units, block_rows, vectors, finals)`` where ``vectors`` are the
    block columns of the canonical matrix (as sort keys) and ``finals`` is a
    list of ``(row_order, signs, history)`` end states.  With
    ``all_witnesses`` no state merging happens, so every tied arrangement is
    reported.
    """
    e = U.entries
    units = _split_units(e)
    unit_rows = {r for r, _, _ in units}
    unit_cols = {c for _, c, _ in units}
    rows = tuple(r for r in range(N) if r not in unit_rows)
    cols = [c for c in range(N) if c not in unit_cols]

    # per-entry (key, negated key) for the block only
    kp = {}
    for c in cols:
        for r in rows:
            kp[r, c] = _key_pair(e[c * N + r])

    signs0 = [0] * N
    states = [((rows,) if rows else (), signs0, 0, ())]
    vectors: list[tuple[int, ...]] = []
    first = True
    for _pos in range(len(cols)):
        best = None
        winners = []
        for cells, signs, used, hist in states:
            for c in cols:
                bit = 1 << c
                if used & bit:
                    continue
                for t in ((1,) if first else (1, -1)):
                    vec: list[int] = []
                    for cell in cells:
                        if len(cell) == 1:
                            r = cell[0]
                            k, kn = kp[r, c]
                            s = signs[r]
                            vec.append((k if k < kn else kn) if s == 0 else (k if s * t > 0 else kn))
                            continue
                        vals = []
                        for r in cell:
                            k, kn = kp[r, c]
                            s = signs[r]
                            vals.append((k if k < kn else kn) if s == 0 else (k if s * t > 0 else kn))
                        vals.sort()
                        vec.extend(vals)
                    tv = tuple(vec)
                    if best is None or tv < best:
                        best = tv
                        winners = [(cells, signs, used, hist, c, t)]
                    elif tv == best:
                        winners.append((cells, signs, used, hist, c, t))
        first = False
        vectors.append(best)
        new_states = []
        seen = set()
        for cells, signs, used, hist, c, t in winners:
            nsigns = list(signs)
            ncells = []
            for cell in cells:
                if len(cell) == 1:
                    r = cell[0]
                    if signs[r] == 0:
                        k, kn = kp[r, c]
                        if k != kn:
                            nsigns[r] = t if k < kn else -t
                    ncells.append(cell)
                    continue
                vals = []
                for r in cell:
                    k, kn = kp[r, c]
                    s = signs[r]
                    if s == 0:
                        v = k if k < kn else kn
                        if k != kn:
                            nsigns[r] = t if k < kn else -t
                    else:
                        v = k if s * t > 0 else kn
                    vals.append((v, r))
                vals.sort()
                group = [vals[0][1]]
                for (v0, _), (v1, r1) in zip(vals, vals[1:]):
                    if v1 == v0:
                        group.append(r1)
                    else:
                        ncells.append(tuple(sorted(group)))
                        group = [r1]
                ncells.append(tuple(sorted(group)))
            nhist = hist + ((c, t),)
            ncells_t = tuple(ncells)
            if not all_witnesses:
                # (L, R) and (-L, -R) give the same matrix: normalise the overall sign
                lead = next((nsigns[r] for r in rows if nsigns[r] != 0), 1)
                if lead < 0:
                    nsigns = [-s for s in nsigns]
                    nhist = tuple((cc, -tt) for cc, tt in nhist)
                key = (ncells_t, tuple(nsigns), used | (1 << c))
                if key in seen:
                    continue
                seen.add(key)
            new_states.append((ncells_t, nsigns, used | (1 << c), nhist))
        states = new_states

    finals = []
    for cells, signs, _used, hist in states:
        order = []
        for cell in cells:
            if len(cell) != 1:
                raise AssertionError("canonical search ended with unresolved rows")
            order.append(cell[0])
        finals.append((tuple(order), tuple(signs), hist))
    return units, rows, vectors, finals


def _assemble(units, finals_entry) -> tuple[SignedPerm, SignedPerm]:
    order, signs, hist = finals_entry
    m = len(units)
    lperm = [0] * N
    lsign = [1] * N
    rperm = [0] * N
    rsign = [1] * N
    for p, (r, c, v) in enumerate(units):
        lperm[r] = p
        lsign[r] = -v  # entry becomes -1
        rperm[p] = c
    for q, r in enumerate(order):
        lperm[r] = m + q
        lsign[r] = signs[r] if signs[r] != 0 else 1
    for q, (c, t) in enumerate(hist):
        rperm[m + q] = c
        rsign[m + q] = t
    return SignedPerm(tuple(lperm), tuple(lsign)), SignedPerm(tuple(rperm), tuple(rsign))


def _matrix_from(m: int, vectors) -> SO6Matrix:
    ent = [0] * (N * N)
    for p in range(m):
        ent[p * N + p] = MINUS_ONE
    for q, vec in enumerate(vectors):
        base = (m + q) * N + m
        for i, k in enumerate(vec):
            ent[base + i] = _unkey(k)
    return SO6Matrix(ent)


def canonicalize(U: SO6Matrix) -> CanonicalForm:
    """Orbit minimum of ``U`` together with witnesses ``left``, ``right``."""
    units, _rows, vectors, finals = _search(U)
    left, right = _assemble(units, finals[0])
    M = _matrix_from(len(units), vectors)
    M._sig = U._sig  # signatures are orbit invariants
    return CanonicalForm(M, left, right)


def canonical_matrix(U: SO6Matrix) -> SO6Matrix:
    return canonicalize(U).matrix


def equivalent(U: SO6Matrix, V: SO6Matrix) -> bool:
    if signature(U) != signature(V):
        return False
    return canonicalize(U).matrix == canonicalize(V).matrix


def automorphisms(U: SO6Matrix) -> list[tuple[SignedPerm, SignedPerm]]:
    """Pairs ``(A, B)`` with ``A @ U @ B == U`` found by the block search.

    The list always contains the identity pair and ``(-I, -I)``.  When ``U``
    has +-1 entries the symmetries that only move those rows are not listed;
    :func:`has_odd_automorphism` accounts for them separately.
    """
    units, _rows, _vectors, finals = _search(U, all_witnesses=True)
    wit = [_assemble(units, f) for f in finals]
    L0, R0 = wit[0]
    L0i, R0i = L0.inverse(), R0.inverse()
    out = []
    neg = SignedPerm(tuple(range(N)), (-1,) * N)
    for L, R in wit:
        A, B = L0i.compose(L), R.compose(R0i)
        out.append((A, B))
        out.append((neg.compose(A), B.compose(neg)))
    return out


def has_odd_automorphism(U: SO6Matrix) -> bool:
    """True when some ``A U B = U`` has ``det A = det B = -1``.

    Exactly then the orbit under determinant-one pairs coincides with the
    same-determinant part of the full orbit.
    """
    if _split_units(U.entries):
        # flip the sign of one +-1 row and of its column
        return True
    return any(A.det() < 0 for A, _ in automorphisms(U))
