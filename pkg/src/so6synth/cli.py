"""Command line entry point: ``so6synth <command> ...``.

Human-readable text goes to stdout as usual.  Every result is additionally
emitted as one machine line ``@record {json}``; the ``kind`` field names the
schema (``layer``, ``build``, ``synth``, ``verify``, ``oracle_bfs`` ...).

Exit codes are stable:

    0  success
    2  usage error (bad flags or flag combinations)
    3  validation error (target does not parse or violates matrix invariants)
    4  resource failure (dyadic overflow, memory, I/O)
    5  integrity failure (corrupt LUT file, failed self-check)
    6  search cap reached before the target was found
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import resource
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__, lutgen, mitm, store
from .errors import (DyadicOverflow, IntegrityError, InvalidMatrix, ParseError, ResourceExhausted,
                     SearchBudgetExceeded)
from .so6 import SO6Matrix, Word, evaluate_word, validate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_RESOURCE = 4
EXIT_INTEGRITY = 5
EXIT_CAP = 6

RECORD_PREFIX = "@record "
BENCH_COLUMNS = ("k", "representatives", "time_s", "memory_mb")


class UsageError(Exception):
    pass


@dataclass
class Config:
    threads: int
    variant: str
    verbose: int
    seed: int | None


def _record(kind: str, **fields) -> None:
    print(RECORD_PREFIX + json.dumps({"kind": kind, **fields}, sort_keys=True), flush=True)


def _peak_mb() -> float:
    # ru_maxrss is KiB on Linux
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _non_negative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _default_threads() -> int:
    try:
        return lutgen.default_threads()
    except ValueError:
        raise UsageError("SO6_THREADS must be an integer") from None


# ---------------------------------------------------------------------------
# inputs


def _load_root(source: str) -> SO6Matrix:
    if source == "identity":
        return SO6Matrix.identity()
    return _load_target(source)


def _load_target(source: str) -> SO6Matrix:
    """A matrix file, a word file, or an inline word."""
    path = Path(source)
    if not path.is_file() and "/" in source:
        raise UsageError(f"no such file: {source}")
    text = path.read_text() if path.is_file() else source
    stripped = text.lstrip()
    if stripped[:1].isdigit() or stripped[:1] in "+-#":
        return store.parse_matrix(text)
    w = store.parse_word(text)
    U = evaluate_word(w)
    validate(U)
    return U


def _check_variant(cfg: Config) -> None:
    if cfg.variant != "o6":
        raise UsageError("engine is pinned to o6 equivalence; --variant so6 is only available to the oracle")


# ---------------------------------------------------------------------------
# commands


def _build(root: SO6Matrix, depth: int, threads: int, quiet: bool = False):
    rows = []
    t0 = time.perf_counter()
    cumulative = 0

    def progress(st: lutgen.LayerStats) -> None:
        nonlocal cumulative
        cumulative += st.size
        elapsed = time.perf_counter() - t0
        mem = _peak_mb()
        rows.append((st.depth, cumulative, elapsed, mem))
        if not quiet:
            print(f"layer {st.depth:2d}: {st.size:10d} new, {cumulative:10d} total, "
                  f"{st.seconds:8.3f}s, peak {mem:8.1f} MB", flush=True)
            _record("layer", depth=st.depth, size=st.size, cumulative=cumulative, candidates=st.candidates,
                    known=st.known, seconds=round(st.seconds, 6), peak_mb=round(mem, 1))

    lut = lutgen.generate_lut(root, depth, threads=threads, progress=progress)
    return lut, rows, time.perf_counter() - t0


def cmd_build_lut(args, cfg: Config) -> int:
    _check_variant(cfg)
    root = _load_root(args.root)
    lut, _rows, seconds = _build(root, args.depth, cfg.threads)
    if args.out:
        store.save_lut(lut, args.out)
    total = len(lut)
    print(f"built depth {lut.depth}: {total} representatives in {seconds:.3f}s"
          + (f", written to {args.out}" if args.out else ""))
    _record("build", depth=lut.depth, layers=lut.layer_sizes(), cumulative=lut.cumulative(),
            representatives=total, seconds=round(seconds, 6), peak_mb=round(_peak_mb(), 1), out=args.out)
    return EXIT_OK


def _synth(args, cfg: Config) -> tuple[Word, int, str, float]:
    _check_variant(cfg)
    U = _load_target(args.target)
    budget = args.probe_budget / 1000.0 if args.probe_budget is not None else None
    t0 = time.perf_counter()
    lut = store.load_lut(args.lut) if args.lut else None
    if lut is not None:
        if lut.root != SO6Matrix.identity():
            raise UsageError("--lut needs an identity-rooted table")
        hit = lutgen.lut_lookup(lut, U)
        if hit is not None:
            w = lutgen.reconstruct(lut, hit, U)
            return w, len(w.steps), "lut", time.perf_counter() - t0
    w, res = mitm.synthesize(U, max_tcount=args.max_tcount, threads=cfg.threads,
                             probe=args.probe or args.probe_budget is not None, probe_budget=budget,
                             left_lut=lut, fixup=args.fixup)
    return w, res.tcount, "mitm", time.perf_counter() - t0


def cmd_synth(args, cfg: Config) -> int:
    w, t, method, seconds = _synth(args, cfg)
    print(store.format_word(w))
    print(f"tcount {t} ({method}, {seconds:.3f}s)")
    _record("synth", word=store.format_word(w), tcount=t, method=method, seconds=round(seconds, 6))
    return EXIT_OK


def cmd_tcount(args, cfg: Config) -> int:
    _w, t, _method, _seconds = _synth(args, cfg)
    print(t)
    return EXIT_OK


def cmd_verify(args, cfg: Config) -> int:
    report = store.verify_lut(args.lut, deep=args.deep, sample=args.sample, seed=cfg.seed or 0)
    for offset, msg in report.problems:
        print(f"offset {offset}: {msg}")
    counts = report.header.counts if report.header else []
    if report.ok:
        print(f"ok: {sum(counts)} records in {len(counts)} layers, {report.checked} checked in full")
    _record("verify", ok=report.ok, checked=report.checked, counts=counts,
            problems=[{"offset": o, "message": m} for o, m in report.problems])
    return EXIT_OK if report.ok else EXIT_INTEGRITY


def cmd_bench(args, cfg: Config) -> int:
    _check_variant(cfg)
    root = _load_root(args.root)
    _lut, rows, _seconds = _build(root, args.depth, cfg.threads, quiet=True)
    fh = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(BENCH_COLUMNS)
        for k, reps, elapsed, mem in rows:
            wr.writerow((k, reps, f"{elapsed:.6f}", f"{mem:.1f}"))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_oracle(args, cfg: Config) -> int:
    from . import oracle

    if args.oracle_cmd == "bfs":
        root = _load_root(args.root)
        try:
            layers = oracle.naive_bfs(root, args.depth, variant=cfg.variant)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        sizes = [len(s) for s in layers]
        print(" ".join(map(str, sizes)))
        _record("oracle_bfs", variant=cfg.variant, layers=sizes)
    elif args.oracle_cmd == "canon":
        M = oracle.naive_canon(_load_target(args.target), cfg.variant)
        text = store.format_matrix(M)
        print(text, end="")
        _record("oracle_canon", variant=cfg.variant, matrix=text)
    elif args.oracle_cmd == "vectors":
        data = oracle.build_vectors(seed=args.seed if args.seed is not None else 2024, bfs_depth=args.depth)
        Path(args.out).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
        print(f"wrote {args.out}")
        _record("oracle_vectors", out=args.out, bfs=data["bfs"]["o6"]["counts"])
    else:
        A, B = _load_target(args.a), _load_target(args.b)
        same = oracle.naive_equivalent(A, B, cfg.variant)
        print("equivalent" if same else "not equivalent")
        _record("oracle_equivalent", variant=cfg.variant, equivalent=same)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=_positive, default=None,
                        help="worker processes (default: $SO6_THREADS or all cores)")
    common.add_argument("--variant", choices=("o6", "so6"), default="o6",
                        help="equivalence group; the engine supports o6 only")
    common.add_argument("--seed", type=int, default=None, help="seed for sampled checks")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = _Parser(prog="so6synth", description="T-count optimal two-qubit Clifford+T synthesis in SO(6).")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser, metavar="COMMAND")

    b = sub.add_parser("build-lut", parents=[common], help="enumerate classes and save the table")
    b.add_argument("--root", default="identity", help="'identity' or a matrix/word file")
    b.add_argument("--depth", type=_non_negative, required=True)
    b.add_argument("--out", help="output LUT path")
    b.set_defaults(func=cmd_build_lut)

    for name, func, help_ in (("synth", cmd_synth, "optimal word for a target"),
                              ("tcount", cmd_tcount, "print only the optimal T-count")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--target", required=True, help="matrix file, word file or inline word")
        g = s.add_mutually_exclusive_group()
        g.add_argument("--lut", help="answer from this table, seeding the search when out of range")
        g.add_argument("--mitm", action="store_true", help="plain meet-in-the-middle (the default)")
        s.add_argument("--max-tcount", type=_non_negative, default=None, help="give up beyond this T-count")
        s.add_argument("--probe", action="store_true", help="enable the brute-force probe")
        s.add_argument("--probe-budget", type=float, default=None, metavar="MS",
                       help="probe time budget in milliseconds (implies --probe)")
        s.add_argument("--fixup", choices=("canonical", "brute"), default="canonical")
        s.set_defaults(func=func)

    v = sub.add_parser("verify", parents=[common], help="re-check a LUT file")
    v.add_argument("--lut", required=True)
    v.add_argument("--deep", action="store_true", help="check every record")
    v.add_argument("--sample", type=float, default=0.01, help="fraction checked without --deep")
    v.set_defaults(func=cmd_verify)

    bn = sub.add_parser("bench", parents=[common], help="per-layer build CSV")
    bn.add_argument("--root", default="identity")
    bn.add_argument("--depth", type=_non_negative, required=True)
    bn.add_argument("--csv", help="write CSV here instead of stdout")
    bn.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle", parents=[common], help=argparse.SUPPRESS)
    osub = o.add_subparsers(dest="oracle_cmd", required=True, parser_class=_Parser)
    ob = osub.add_parser("bfs", parents=[common])
    ob.add_argument("--root", default="identity")
    ob.add_argument("--depth", type=_non_negative, required=True)
    oc = osub.add_parser("canon", parents=[common])
    oc.add_argument("--target", required=True)
    oe = osub.add_parser("equivalent", parents=[common])
    oe.add_argument("a")
    oe.add_argument("b")
    ov = osub.add_parser("vectors", parents=[common])
    ov.add_argument("--out", required=True)
    ov.add_argument("--depth", type=_non_negative, default=4)
    o.set_defaults(func=cmd_oracle)
    # keep the hidden command out of the command list
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "oracle"]
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        threads = args.threads if args.threads is not None else _default_threads()
        cfg = Config(threads=threads, variant=args.variant, verbose=args.verbose, seed=args.seed)
        if cfg.seed is not None:
            random.seed(cfg.seed)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, InvalidMatrix) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SearchBudgetExceeded as exc:
        print(f"search cap reached: {exc}", file=sys.stderr)
        return EXIT_CAP
    except IntegrityError as exc:
        print(f"integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (DyadicOverflow, ResourceExhausted, MemoryError, OSError) as exc:
        print(f"resource failure: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
