"""Layered breadth-first enumeration of equivalence classes (the lookup table).

Layer ``d`` holds exactly one canonical representative for every class at
T-distance ``d`` from the root.  Each extension applies the 15 involutive
generators to every node of the last layer, canonicalises, and keeps the
results that are new to the whole table.  Because every step changes the
distance by exactly one, a class first met while building layer ``d + 1``
really is at distance ``d + 1``.

Layers are kept sorted by the bytes of their canonical matrices, so the set
*and* the order of a finished layer depend only on the root and the depth.
"""

from __future__ import annotations

import os
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

from . import canon
from .errors import DyadicOverflow, IntegrityError, ResourceExhausted
from .so6 import (NUM_GENERATORS, X_KERNELS, GenIndex, SignedPerm, SO6Matrix, Word, evaluate_word,
                  mat_mul, normalize_factors, push_through, validate)

ROOT_GEN = 0xFF
_PACK36 = struct.Struct("<36Q")


class Node:
    """One stored class representative.

    ``gen_id`` is the generator applied to the parent's canonical matrix
    (``None`` for the root) and ``parent`` indexes the previous layer.
    ``skip`` is the generator that leads straight back to the parent's class.
    """

    __slots__ = ("canon", "gen_id", "parent", "skip")

    def __init__(self, canon_m: SO6Matrix, gen_id: int | None, parent: int, skip: int = -1):
        self.canon = canon_m
        self.gen_id = gen_id
        self.parent = parent
        self.skip = skip

    def __repr__(self) -> str:
        return f"Node(gen_id={self.gen_id}, parent={self.parent})"


@dataclass
class LayerStats:
    depth: int
    size: int
    candidates: int = 0
    known: int = 0
    seconds: float = 0.0

    @property
    def rate(self) -> float:
        return self.candidates / self.seconds if self.seconds > 0 else 0.0


@dataclass
class Lut:
    root: SO6Matrix
    layers: list[list[Node]] = field(default_factory=list)
    index: dict[tuple[int, ...], tuple[int, int]] = field(default_factory=dict)
    signatures: set[int] = field(default_factory=set)
    stats: list[LayerStats] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    root_form: canon.CanonicalForm | None = None

    @property
    def depth(self) -> int:
        return len(self.layers) - 1

    def layer_sizes(self) -> list[int]:
        return [len(layer) for layer in self.layers]

    def cumulative(self) -> list[int]:
        out, total = [], 0
        for n in self.layer_sizes():
            total += n
            out.append(total)
        return out

    def __len__(self) -> int:
        return len(self.index)

    def find(self, M: SO6Matrix) -> tuple[int, int] | None:
        """Location of an already-canonical matrix, or None."""
        if M._sig is not None and M._sig not in self.signatures:
            return None
        return self.index.get(M.entries)

    def layer_set(self, d: int) -> set[SO6Matrix]:
        return {n.canon for n in self.layers[d]}


def canon_bytes(M: SO6Matrix) -> bytes:
    return _PACK36.pack(*M.entries)


def init_lut(root: SO6Matrix) -> Lut:
    validate(root)
    cf = canon.canonicalize(root)
    lut = Lut(root=root, root_form=cf)
    lut.layers.append([Node(cf.matrix, None, -1)])
    lut.index[cf.matrix.entries] = (0, 0)
    lut.signatures.add(canon.signature(cf.matrix))
    lut.stats.append(LayerStats(0, 1))
    return lut


def _expand(parents: Iterable[tuple[int, tuple[int, ...], int]], suppress: bool):
    """Canonical children of a batch of parents.

    Yields ``(parent_idx, gen_id, canon_entries, skip)`` in (parent, gen) order.
    """
    out = []
    for pidx, entries, skip in parents:
        for gid in range(NUM_GENERATORS):
            if suppress and gid == skip:
                continue
            cf = canon.canonicalize(SO6Matrix(X_KERNELS[gid](entries)))
            back, _ = push_through(cf.left, gid)
            out.append((pidx, gid, cf.matrix.entries, back))
    return out


def _expand_job(args):
    parents, suppress = args
    return _expand(parents, suppress)


def extend_one_step(lut: Lut, *, threads: int = 1, suppress_backtrack: bool = True,
                    on_insert: Callable[[int, Node], bool] | None = None,
                    pool: ProcessPoolExecutor | None = None) -> LayerStats:
    """Append the next layer.

    ``on_insert(index, node)`` runs after every successful insertion; if it
    returns True the extension stops early and the partial layer is kept
    unsorted (used by the meet-in-the-middle search).
    """
    depth = len(lut.layers)
    last = lut.layers[-1]
    t0 = time.perf_counter()
    parents = [(i, n.canon.entries, n.skip) for i, n in enumerate(last)]
    try:
        if threads > 1 and len(parents) >= 4 * threads:
            chunks = _chunks(parents, threads * 4)
            own = pool is None
            ex = pool or ProcessPoolExecutor(max_workers=threads)
            try:
                batches = ex.map(_expand_job, [(c, suppress_backtrack) for c in chunks])
                results = (item for b in batches for item in b)
                stats, stopped = _merge(lut, depth, results, on_insert)
            finally:
                if own:
                    ex.shutdown()
        else:
            stats, stopped = _merge(lut, depth, _iter_expand(parents, suppress_backtrack), on_insert)
    except DyadicOverflow as exc:
        raise DyadicOverflow(f"overflow while building layer {depth}: {exc}") from exc
    except MemoryError:
        if len(lut.layers) > depth:
            lut.layers.pop()
        raise ResourceExhausted(f"out of memory while building layer {depth}", lut.layer_sizes())
    if not stopped:
        _sort_layer(lut, depth)
    stats.seconds = time.perf_counter() - t0
    lut.stats.append(stats)
    return stats


def _iter_expand(parents, suppress):
    for p in parents:
        yield from _expand([p], suppress)


def _chunks(items: list, n: int) -> list[list]:
    size = max(1, -(-len(items) // n))
    return [items[i:i + size] for i in range(0, len(items), size)]


def _merge(lut: Lut, depth: int, results, on_insert) -> tuple[LayerStats, bool]:
    layer: list[Node] = []
    lut.layers.append(layer)
    index = lut.index
    sigs = lut.signatures
    stats = LayerStats(depth, 0)
    for pidx, gid, entries, back in results:
        stats.candidates += 1
        if entries in index:
            stats.known += 1
            continue
        M = SO6Matrix(entries)
        node = Node(M, gid, pidx, back)
        index[entries] = (depth, len(layer))
        sigs.add(canon.signature(M))
        layer.append(node)
        if on_insert is not None and on_insert(len(layer) - 1, node):
            stats.size = len(layer)
            return stats, True
    stats.size = len(layer)
    return stats, False


def _sort_layer(lut: Lut, depth: int) -> None:
    layer = lut.layers[depth]
    layer.sort(key=lambda n: canon_bytes(n.canon))
    for i, n in enumerate(layer):
        lut.index[n.canon.entries] = (depth, i)


def generate_lut(root: SO6Matrix, k: int, *, threads: int = 1, suppress_backtrack: bool = True,
                 progress: Callable[[LayerStats], None] | None = None) -> Lut:
    if k < 0:
        raise ValueError("depth must be non-negative")
    lut = init_lut(root)
    lut.meta.update(depth=k, threads=threads, suppress_backtrack=suppress_backtrack)
    if progress:
        progress(lut.stats[0])
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for _ in range(k):
            st = extend_one_step(lut, threads=threads, suppress_backtrack=suppress_backtrack, pool=pool)
            if progress:
                progress(st)
    finally:
        if pool is not None:
            pool.shutdown()
    return lut


def default_threads() -> int:
    env = os.environ.get("SO6_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# queries


def lut_lookup(lut: Lut, U: SO6Matrix) -> tuple[int, Node] | None:
    if canon.signature(U) not in lut.signatures:
        return None
    M = canon.canonicalize(U).matrix
    loc = lut.index.get(M.entries)
    if loc is None:
        return None
    d, i = loc
    return d, lut.layers[d][i]


@dataclass(frozen=True)
class Reconstruction:
    """Exact factorisation ``target == evaluate_word(word) @ root @ right``."""

    word: Word
    right: SignedPerm


def node_path(lut: Lut, depth: int, node: Node) -> list[Node]:
    path = [node]
    while depth > 0:
        node = lut.layers[depth - 1][node.parent]
        depth -= 1
        path.append(node)
    return path[::-1]


def reconstruct_exact(lut: Lut, depth: int, node: Node, target: SO6Matrix | None = None) -> Reconstruction:
    """Walk parents down to the root and rebuild an exact factorisation.

    Each layer satisfies ``N_d = L_d X(g_d) N_{d-1} R_d`` with witnesses
    recomputed by re-canonicalising, so the whole chain multiplies out to
    ``N = A root B``; signed permutations inside ``A`` are pushed to the
    right through the generators.
    """
    path = node_path(lut, depth, node)
    root_cf = lut.root_form if lut.root_form is not None else canon.canonicalize(lut.root)
    if root_cf.matrix != path[0].canon:
        raise IntegrityError("layer 0 does not hold the canonical root")
    lefts: list[SignedPerm] = [root_cf.left]
    gens: list[int] = []
    right = root_cf.right
    for d in range(1, len(path)):
        n = path[d]
        cf = canon.canonicalize(SO6Matrix(X_KERNELS[n.gen_id](path[d - 1].canon.entries)))
        if cf.matrix != n.canon:
            raise IntegrityError(f"node at depth {d} is not reproduced by its parent and generator")
        lefts.append(cf.left)
        gens.append(n.gen_id)
        right = right.compose(cf.right)
    # N = L_d X_d ... L_1 X_1 L_0 . root . R_0 ... R_d
    if target is not None:
        tf = canon.canonicalize(target)
        if tf.matrix != node.canon:
            raise IntegrityError("target is not in the class of the given node")
        pre, post = tf.left.inverse(), tf.right.inverse()
    else:
        pre = post = SignedPerm.identity()
    factors: list = [pre]
    for d in range(len(gens), 0, -1):
        factors.append(lefts[d])
        factors.append(GenIndex.from_id(gens[d - 1]))
    factors.append(lefts[0])
    word = normalize_factors(factors)
    rec = Reconstruction(word, right.compose(post))
    expected = target if target is not None else node.canon
    got = rec.right.act_right(mat_mul(evaluate_word(word), lut.root))
    if got != expected:
        raise IntegrityError("reconstructed factorisation does not evaluate to the target")
    return rec


def reconstruct(lut: Lut, hit: tuple[int, Node], target: SO6Matrix | None = None) -> Word:
    """Word with exactly ``depth`` steps for a lookup hit.

    For a signed-permutation root (the identity in particular) the returned
    word evaluates exactly to ``target`` (or to the stored representative).
    For other roots the steps satisfy ``evaluate_word(w) @ root ~ target``.
    """
    depth, node = hit
    rec = reconstruct_exact(lut, depth, node, target)
    rp = SignedPerm.from_matrix(lut.root)
    if rp is not None:
        return Word(rec.word.steps, rec.word.correction.compose(rp).compose(rec.right))
    return rec.word


def synthesize(lut: Lut, U: SO6Matrix) -> Word | None:
    hit = lut_lookup(lut, U)
    if hit is None:
        return None
    return reconstruct(lut, hit, U)
