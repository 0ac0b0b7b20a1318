"""Binary LUT files and the line-oriented text formats for matrices and words.

LUT file layout (all integers little-endian)::

    offset  size        field
    0       8           magic b"SO6LUT01"
    8       4           u32 format version (1)
    12      8           u64 fingerprint of the canonical-form constants
    20      1           u8 equivalence variant (0 = O(6) pairs, 1 = SO(6) pairs)
    21      288         root matrix, 36 packed dyadic words, column-major
    309     4           u32 layer count L
    313     8*L         u64 record count of every layer
    ...     297*n       records, layer by layer, each sorted by canonical bytes:
                          36 x u64 canonical matrix (column-major)
                          u8  generator id (0xFF for the root record)
                          u64 parent index in the previous layer
    end-4   4           u32 CRC-32 of every preceding byte

Equal tables serialise to identical bytes.
"""

from __future__ import annotations

import os
import random
import re
import struct
import tempfile
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from . import canon
from . import dyadic as dy
from .errors import CorruptFileError, DyadicOverflow, InvalidMatrix, ParseError
from .lutgen import ROOT_GEN, LayerStats, Lut, Node
from .so6 import (N, NUM_GENERATORS, X_KERNELS, GenIndex, SignedPerm, SO6Matrix, Word, push_through,
                  validate)

MAGIC = b"SO6LUT01"
VERSION = 1
VARIANT_O6 = 0
VARIANT_SO6 = 1
VARIANT_NAMES = {VARIANT_O6: "o6", VARIANT_SO6: "so6"}

_HEAD = struct.Struct("<8sIQB")
_MATRIX = struct.Struct("<36Q")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_RECORD = struct.Struct("<36QBQ")
RECORD_SIZE = _RECORD.size
HEADER_FIXED = _HEAD.size + _MATRIX.size + _U32.size

# keep layer-count allocation sane on garbage headers
_MAX_LAYERS = 64


def fingerprint() -> int:
    """Digest of everything a stored table silently depends on.

    Covers the hash constants, the packing widths and the signature of a
    fixed reference matrix, so any change to how classes are keyed makes old
    files unreadable instead of subtly wrong.
    """
    h = canon.HASH_SEED
    for v in (canon.HASH_MUL1, canon.HASH_MUL2, canon.HASH_GOLDEN,
              dy.A_BITS, dy.B_BITS, dy.C_BITS, VERSION):
        h = canon._mix(h ^ v) + canon.HASH_GOLDEN
    ref = SO6Matrix(X_KERNELS[0](X_KERNELS[7](SO6Matrix.identity().entries)))
    return canon._mix(h ^ canon.signature(SO6Matrix(ref.entries)))


# ---------------------------------------------------------------------------
# save


def _ordered_layers(lut: Lut) -> list[list[tuple[bytes, int, int]]]:
    """Layers as (canonical bytes, gen byte, parent) sorted by bytes, parents remapped."""
    out: list[list[tuple[bytes, int, int]]] = []
    remap: list[int] = []
    for d, layer in enumerate(lut.layers):
        order = sorted(range(len(layer)), key=lambda i: _MATRIX.pack(*layer[i].canon.entries))
        new_pos = [0] * len(layer)
        rows = []
        for pos, i in enumerate(order):
            new_pos[i] = pos
            n = layer[i]
            if d == 0:
                rows.append((_MATRIX.pack(*n.canon.entries), ROOT_GEN, 0))
            else:
                rows.append((_MATRIX.pack(*n.canon.entries), n.gen_id, remap[n.parent]))
        out.append(rows)
        remap = new_pos
    return out


def dump_lut(lut: Lut, variant: int = VARIANT_O6) -> bytes:
    layers = _ordered_layers(lut)
    parts = [_HEAD.pack(MAGIC, VERSION, fingerprint(), variant),
             _MATRIX.pack(*lut.root.entries),
             _U32.pack(len(layers))]
    parts.extend(_U64.pack(len(rows)) for rows in layers)
    for rows in layers:
        for mbytes, gen, parent in rows:
            parts.append(mbytes)
            parts.append(struct.pack("<BQ", gen, parent))
    body = b"".join(parts)
    return body + _U32.pack(zlib.crc32(body))


def save_lut(lut: Lut, path: str | os.PathLike, variant: int = VARIANT_O6) -> None:
    """Write atomically: a failed save never leaves a partial file behind."""
    data = dump_lut(lut, variant)
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# load and verify


@dataclass
class LutHeader:
    version: int
    fingerprint: int
    variant: int
    root: SO6Matrix
    counts: list[int]

    @property
    def records_offset(self) -> int:
        return HEADER_FIXED + 8 * len(self.counts)

    def record_offset(self, depth: int, idx: int) -> int:
        return self.records_offset + RECORD_SIZE * (sum(self.counts[:depth]) + idx)


@dataclass
class VerifyReport:
    header: LutHeader | None
    checked: int = 0
    problems: list[tuple[int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def parse_header(data: bytes) -> LutHeader:
    if len(data) < HEADER_FIXED:
        raise CorruptFileError("file ends inside the fixed header", len(data))
    magic, version, fp, variant = _HEAD.unpack_from(data, 0)
    if magic != MAGIC:
        raise CorruptFileError("bad magic, not a LUT file", 0)
    if version != VERSION:
        raise CorruptFileError(f"unsupported format version {version}", 8)
    if fp != fingerprint():
        raise CorruptFileError(f"fingerprint {fp:#018x} does not match this build ({fingerprint():#018x})", 12)
    if variant not in VARIANT_NAMES:
        raise CorruptFileError(f"unknown equivalence variant tag {variant}", 20)
    root = SO6Matrix(_MATRIX.unpack_from(data, _HEAD.size))
    (nlayers,) = _U32.unpack_from(data, _HEAD.size + _MATRIX.size)
    if nlayers == 0 or nlayers > _MAX_LAYERS:
        raise CorruptFileError(f"implausible layer count {nlayers}", _HEAD.size + _MATRIX.size)
    end = HEADER_FIXED + 8 * nlayers
    if len(data) < end:
        raise CorruptFileError("file ends inside the layer count table", len(data))
    counts = [_U64.unpack_from(data, HEADER_FIXED + 8 * d)[0] for d in range(nlayers)]
    if counts[0] != 1:
        raise CorruptFileError(f"layer 0 must hold one record, header says {counts[0]}", HEADER_FIXED)
    expected = end + RECORD_SIZE * sum(counts) + 4
    if len(data) != expected:
        where = min(len(data), expected)
        raise CorruptFileError(f"file is {len(data)} bytes but the header implies {expected}", where)
    return LutHeader(version, fp, variant, root, counts)


def _check_crc(data: bytes) -> bool:
    (stored,) = _U32.unpack_from(data, len(data) - 4)
    return zlib.crc32(data[:-4]) == stored


def _decode(data: bytes, header: LutHeader) -> list[list[tuple[tuple[int, ...], int, int]]]:
    layers = []
    off = header.records_offset
    for cnt in header.counts:
        rows = []
        for _ in range(cnt):
            rec = _RECORD.unpack_from(data, off)
            rows.append((rec[:36], rec[36], rec[37]))
            off += RECORD_SIZE
        layers.append(rows)
    return layers


def _check_record(layers, header: LutHeader, d: int, i: int, root_canon: SO6Matrix | None) -> str | None:
    """Full invariants of one record; returns a description of the first violation."""
    entries, gen, parent = layers[d][i]
    M = SO6Matrix(entries)
    try:
        validate(M)
    except (InvalidMatrix, DyadicOverflow) as exc:
        return f"record matrix invalid: {exc}"
    cf = canon.canonicalize(M)
    if cf.matrix != M:
        return "record matrix is not in canonical form"
    if d == 0:
        if gen != ROOT_GEN or parent != 0:
            return "root record must carry generator 0xFF and parent 0"
        if root_canon is not None and M != root_canon:
            return "root record is not the canonical form of the header root"
        return None
    if gen >= NUM_GENERATORS:
        return f"generator id {gen} out of range"
    if parent >= len(layers[d - 1]):
        return f"parent index {parent} outside layer {d - 1}"
    try:
        parent_m = SO6Matrix(layers[d - 1][parent][0])
        validate(parent_m)
        child = canon.canonicalize(SO6Matrix(X_KERNELS[gen](parent_m.entries))).matrix
    except (InvalidMatrix, DyadicOverflow):
        return f"parent record {parent} in layer {d - 1} is damaged"
    if child != M:
        return "record is not reproduced by its parent and generator"
    return None


def _check_order(layers, header: LutHeader) -> list[tuple[int, str]]:
    problems = []
    seen: set[tuple[int, ...]] = set()
    for d, rows in enumerate(layers):
        prev = None
        for i, (entries, _g, _p) in enumerate(rows):
            key = _MATRIX.pack(*entries)
            if prev is not None and key <= prev:
                problems.append((header.record_offset(d, i), f"layer {d} record {i} breaks the sorted order"))
            if entries in seen:
                problems.append((header.record_offset(d, i), f"layer {d} record {i} duplicates an earlier class"))
            seen.add(entries)
            prev = key
    return problems


def verify_bytes(data: bytes, *, deep: bool = False, sample: float = 0.01, seed: int = 0) -> VerifyReport:
    """Check a serialised table without building it.

    ``deep`` checks every record; otherwise a seeded ``sample`` fraction (at
    least one record per layer) plus the ordering of all records.  A checksum
    mismatch always triggers a deep pass so the damage can be located.
    """
    try:
        header = parse_header(data)
    except CorruptFileError as exc:
        return VerifyReport(None, 0, [(exc.offset if exc.offset is not None else 0, str(exc))])
    report = VerifyReport(header)
    crc_ok = _check_crc(data)
    if not crc_ok:
        deep = True
    layers = _decode(data, header)
    report.problems.extend(_check_order(layers, header))
    try:
        validate(header.root)
        root_canon = canon.canonicalize(header.root).matrix
    except (InvalidMatrix, DyadicOverflow) as exc:
        report.problems.append((_HEAD.size, f"header root invalid: {exc}"))
        root_canon = None
    rng = random.Random(seed)
    for d, rows in enumerate(layers):
        if deep:
            picks = range(len(rows))
        else:
            k = max(1, round(len(rows) * sample)) if rows else 0
            picks = sorted(rng.sample(range(len(rows)), min(k, len(rows))))
        for i in picks:
            report.checked += 1
            msg = _check_record(layers, header, d, i, root_canon)
            if msg is not None:
                report.problems.append((header.record_offset(d, i), f"layer {d} record {i}: {msg}"))
    if not crc_ok and not report.problems:
        report.problems.append((len(data) - 4, "checksum mismatch"))
    report.problems.sort(key=lambda p: p[0])
    return report


def verify_lut(path: str | os.PathLike, *, deep: bool = False, sample: float = 0.01, seed: int = 0) -> VerifyReport:
    return verify_bytes(Path(path).read_bytes(), deep=deep, sample=sample, seed=seed)


def loads_lut(data: bytes, *, sample: float = 0.01, seed: int = 0) -> tuple[Lut, int]:
    """Decode and verify; returns the table and its variant tag."""
    report = verify_bytes(data, sample=sample, seed=seed)
    if not report.ok:
        offset, msg = report.problems[0]
        extra = f" (+{len(report.problems) - 1} more)" if len(report.problems) > 1 else ""
        raise CorruptFileError(msg + extra, offset)
    header = report.header
    assert header is not None
    layers = _decode(data, header)
    lut = Lut(root=header.root, root_form=canon.canonicalize(header.root))
    for d, rows in enumerate(layers):
        nodes = []
        for i, (entries, gen, parent) in enumerate(rows):
            M = SO6Matrix(entries)
            nodes.append(Node(M, None if d == 0 else gen, -1 if d == 0 else parent))
            lut.index[entries] = (d, i)
            lut.signatures.add(canon.signature(M))
        lut.layers.append(nodes)
        lut.stats.append(LayerStats(d, len(nodes)))
    # only the last layer is ever extended, so only it needs backtrack hints
    if len(lut.layers) > 1:
        prev = lut.layers[-2]
        for n in lut.layers[-1]:
            cf = canon.canonicalize(SO6Matrix(X_KERNELS[n.gen_id](prev[n.parent].canon.entries)))
            n.skip = push_through(cf.left, n.gen_id)[0]
    lut.meta.update(depth=lut.depth, variant=VARIANT_NAMES[header.variant])
    return lut, header.variant


def load_lut(path: str | os.PathLike, *, sample: float = 0.01, seed: int = 0) -> Lut:
    lut, variant = loads_lut(Path(path).read_bytes(), sample=sample, seed=seed)
    if variant != VARIANT_O6:
        raise CorruptFileError("table was built for SO(6)-only equivalence; this engine uses O(6)", 20)
    return lut


# ---------------------------------------------------------------------------
# text formats


def format_matrix(U: SO6Matrix) -> str:
    """Six lines of six ``a,b,c`` triples, row-major."""
    lines = []
    for r in range(N):
        lines.append(" ".join("{},{},{}".format(*dy.unpack(U.word(r, c))) for c in range(N)))
    return "\n".join(lines) + "\n"


_TRIPLE = re.compile(r"^([+-]?\d+),([+-]?\d+),(\d+)$")


def parse_matrix(text: str) -> SO6Matrix:
    """Inverse of :func:`format_matrix`; blank lines and ``#`` comments are ignored."""
    rows: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if len(rows) == N:
            raise ParseError(f"more than {N} rows", lineno, 1)
        row = []
        for m in re.finditer(r"\S+", line):
            col = m.start() + 1
            tm = _TRIPLE.match(m.group())
            if tm is None:
                raise ParseError(f"expected a,b,c but found {m.group()!r}", lineno, col)
            a, b, c = (int(g) for g in tm.groups())
            if not dy.is_reduced(a, b, c):
                raise InvalidMatrix(f"line {lineno}, column {col}: entry {a},{b},{c} is not reduced")
            try:
                row.append(dy.pack(a, b, c))
            except DyadicOverflow as exc:
                raise InvalidMatrix(f"line {lineno}, column {col}: {exc}") from exc
        if len(row) != N:
            raise ParseError(f"row has {len(row)} entries, expected {N}", lineno, len(line.rstrip()) + 1)
        rows.append(row)
    if len(rows) != N:
        raise ParseError(f"found {len(rows)} rows, expected {N}", len(text.splitlines()) + 1, 1)
    U = SO6Matrix.from_rows(rows)
    validate(U)
    return U


def format_word(w: Word) -> str:
    return str(w)


_WORD_TOKEN = re.compile(
    r"\s*(?:(?P<gen>[GX])\(\s*(?P<i>\d+)\s*,\s*(?P<j>\d+)\s*\)"
    r"|P\[(?P<perm>[^;\]]*);(?P<signs>[^\]]*)\])"
)


def _position(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def _parse_perm(text: str, m: re.Match) -> SignedPerm:
    where = _position(text, m.start("perm"))
    try:
        perm = tuple(int(t) - 1 for t in m.group("perm").split())
    except ValueError:
        raise ParseError("permutation images must be integers", *where) from None
    if sorted(perm) != list(range(N)):
        raise ParseError(f"P[...] must list a permutation of 1..{N}", *where)
    signs = []
    for t in m.group("signs").split():
        if t == "+":
            signs.append(1)
        elif t in ("-", "−"):
            signs.append(-1)
        else:
            raise ParseError(f"sign must be + or -, found {t!r}", *_position(text, m.start("signs")))
    if len(signs) != N:
        raise ParseError(f"P[...] needs {N} signs, found {len(signs)}", *_position(text, m.start("signs")))
    return SignedPerm(perm, tuple(signs))


def parse_word(text: str) -> Word:
    """Tokens ``G(i,j)`` / ``X(i,j)`` then an optional final ``P[p1..p6; s1..s6]``."""
    steps: list[GenIndex] = []
    correction = None
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _WORD_TOKEN.match(text, pos)
        if m is None:
            p = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected text {text[p:p + 12]!r}", *_position(text, p))
        if correction is not None:
            raise ParseError("the P[...] correction must come last", *_position(text, m.start()))
        if m.group("gen"):
            i, j = int(m.group("i")), int(m.group("j"))
            try:
                steps.append(GenIndex(i, j, m.group("gen") == "X"))
            except ValueError as exc:
                raise ParseError(str(exc), *_position(text, m.start("gen"))) from None
        else:
            correction = _parse_perm(text, m)
        pos = m.end()
    if correction is None:
        return Word(tuple(steps))
    return Word(tuple(steps), correction)
