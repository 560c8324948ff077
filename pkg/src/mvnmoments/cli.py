"""Command-line interface: moments, marriage counts, tables, discovery, benchmarks.

Exit codes: 0 ok, 2 malformed flags, 3 discovery failed with --no-fallback,
4 I/O error, 5 discovery failed (``discover`` command).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import statistics
import sys
import time
from itertools import product
from pathlib import Path
from typing import List, Optional, Sequence

from .covariance import CovarianceSpec, parse_covariance
from .exact_poly import to_text
from .marriage import count_marriages
from .pure import NotFound, RecurrenceCache, SearchLimits, discover, pure_moment
from .stein import moment_stein
from .wick import moment_wick

EXIT_USAGE = 2
EXIT_NOT_FOUND = 3
EXIT_IO = 4
EXIT_DISCOVER = 5

ENGINES = ("wick", "stein", "pure")

BENCH_CASES = {
    "numeric-big": ((570, 560, 750), "1/2,1/3,1/4"),
    "symbolic-mid": ((100, 50, 40), "symbolic"),
}

log = logging.getLogger("mvnmoments")


class UsageError(Exception):
    pass


def _parse_m(text: str, k: int) -> tuple:
    try:
        m = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--m must be a comma list of integers, got {text!r}")
    if len(m) != k:
        raise UsageError(f"--m has {len(m)} entries but --k is {k}")
    if any(x < 0 for x in m):
        raise UsageError("--m entries must be nonnegative")
    return m


def _parse_cov(text: str, k: int) -> CovarianceSpec:
    try:
        return parse_covariance(k, text)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --cov {text!r}: {exc}")


def _parse_pairs(text: str) -> dict:
    """``c12=9,c13=7`` -> ``{"c12": 9, "c13": 7}``; also used for ``m2=0`` style flags."""
    out = {}
    for part in text.split(","):
        name, sep, val = part.partition("=")
        if not sep or not re.fullmatch(r"-?\d+", val.strip()):
            raise UsageError(f"expected name=integer, got {part!r}")
        out[name.strip()] = int(val)
    return out


def default_cache_dir() -> Optional[Path]:
    if os.environ.get("MVNM_NO_CACHE"):
        return None
    base = os.environ.get("MVNM_CACHE_DIR")
    if base:
        return Path(base)
    xdg = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(xdg) / "mvnmoments"


def _cache(args) -> RecurrenceCache:
    if getattr(args, "no_cache", False):
        return RecurrenceCache()
    return RecurrenceCache(args.cache_dir or default_cache_dir())


def compute(cov: CovarianceSpec, m, engine: str, cache: RecurrenceCache, fallback: Optional[str] = "stein"):
    """``(value, metadata)`` for one moment with the chosen engine."""
    if engine == "wick":
        return moment_wick(cov, m), {"fallback_used": False}
    if engine == "stein":
        return moment_stein(cov, m), {"fallback_used": False}
    res = pure_moment(cov, m, cache=cache, fallback=fallback)
    return res.value, res.metadata()


# commands

def cmd_moment(args) -> int:
    m = _parse_m(args.m, args.k)
    cov = _parse_cov(args.cov, args.k)
    try:
        value, meta = compute(cov, m, args.engine, _cache(args), None if args.no_fallback else "stein")
    except NotFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    text = to_text(value)
    if args.format == "json":
        print(json.dumps({
            "engine": args.engine,
            "k": args.k,
            "m": list(m),
            "cov": cov.to_json(),
            "result": text,
            "metadata": meta,
        }, sort_keys=True))
    else:
        print(text)
    return 0


def cmd_coeff(args) -> int:
    m = _parse_m(args.m, args.k)
    cross = _parse_pairs(args.cross) if args.cross else {}
    try:
        print(count_marriages(m, cross))
    except ValueError as exc:
        raise UsageError(str(exc))
    return 0


def table_indices(k: int, grid: Optional[int], diagonal: Optional[int]) -> List[tuple]:
    if grid is not None:
        return list(product(range(1, grid + 1), repeat=k))
    return [(2 * t,) * k for t in range(1, diagonal + 1)]


def table_lines(k: int, indices: Sequence[tuple], engine: str, cov: CovarianceSpec, cache: RecurrenceCache):
    for m in indices:
        value, _ = compute(cov, m, engine, cache)
        yield ",".join(map(str, m)) + "\t" + to_text(value) + "\n"


def cmd_table(args) -> int:
    if (args.grid is None) == (args.diagonal is None):
        raise UsageError("give exactly one of --grid N or --diagonal N")
    n = args.grid if args.grid is not None else args.diagonal
    if n < 1:
        raise UsageError("table size must be at least 1")
    cov = _parse_cov(args.cov, args.k)
    indices = table_indices(args.k, args.grid, args.diagonal)
    try:
        out = open(args.out, "w", newline="\n") if args.out else sys.stdout
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        for line in table_lines(args.k, indices, args.engine, cov, _cache(args)):
            out.write(line)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _parse_fixed(text: str, k: int, direction: int) -> tuple:
    given = _parse_pairs(text) if text else {}
    values = {}
    for name, val in given.items():
        if not re.fullmatch(r"m\d+", name):
            raise UsageError(f"--fixed names must look like m2, got {name!r}")
        values[int(name[1:])] = val
    want = [i for i in range(1, k + 1) if i != direction]
    if sorted(values) != want:
        raise UsageError(f"--fixed must set exactly {', '.join(f'm{i}' for i in want)}")
    if any(v < 0 for v in values.values()):
        raise UsageError("--fixed values must be nonnegative")
    return tuple(values[i] for i in want)


def cmd_discover(args) -> int:
    if not 1 <= args.direction <= args.k:
        raise UsageError(f"--direction must be in 1..{args.k}")
    fixed = _parse_fixed(args.fixed, args.k, args.direction)
    cov = _parse_cov(args.cov, args.k)
    try:
        limits = SearchLimits(max_order=args.max_order, max_degree=args.max_degree)
    except ValueError as exc:
        raise UsageError(str(exc))
    try:
        rec = discover(cov, args.direction, fixed, limits)
    except NotFound as exc:
        print(f"error: {exc}; largest (order, degree) tried: {exc.tried}", file=sys.stderr)
        return EXIT_DISCOVER
    print(rec.summary())
    if args.out:
        try:
            Path(args.out).write_text(rec.dumps() + "\n")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        print(rec.dumps())
    return 0


def run_bench(case: str, repeat: int) -> dict:
    m, cov_text = BENCH_CASES[case]
    cov = parse_covariance(len(m), cov_text)
    samples = {"pure": [], "wick": []}
    engine_used = None
    agree = True
    for _ in range(repeat):
        # a fresh cache per sample so discovery is included in the pure timing
        t0 = time.perf_counter()
        res = pure_moment(cov, m, cache=RecurrenceCache())
        samples["pure"].append(time.perf_counter() - t0)
        engine_used = res.engine
        t0 = time.perf_counter()
        ref = moment_wick(cov, m)
        samples["wick"].append(time.perf_counter() - t0)
        agree = agree and ref == res.value
    med = {name: statistics.median(s) for name, s in samples.items()}
    return {
        "case": case,
        "m": list(m),
        "cov": cov.to_json(),
        "repeat": repeat,
        "samples": samples,
        "median": med,
        "ratio": med["wick"] / med["pure"] if med["pure"] else None,
        "agree": agree,
        "pure_engine": engine_used,
    }


def cmd_bench(args) -> int:
    if args.repeat < 1:
        raise UsageError("--repeat must be at least 1")
    print(json.dumps(run_bench(args.case, args.repeat), indent=1, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mvnm", description="Exact mixed moments of the multivariate normal.")
    p.add_argument("-v", "--verbose", action="store_true", help="log discovery progress")
    sub = p.add_subparsers(dest="command", required=True)

    def cache_flags(sp):
        sp.add_argument("--cache-dir", default=None, help="recurrence cache directory")
        sp.add_argument("--no-cache", action="store_true", help="do not read or write the on-disk cache")

    sp = sub.add_parser("moment", help="compute one mixed moment")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--m", required=True, help="orders m1,m2,...")
    sp.add_argument("--cov", default="symbolic", help="'symbolic' or p/q values for c12,c13,...,c23,...")
    sp.add_argument("--engine", choices=ENGINES, default="wick")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--no-fallback", action="store_true", help="fail with exit 3 if discovery fails")
    cache_flags(sp)
    sp.set_defaults(func=cmd_moment)

    sp = sub.add_parser("coeff", help="count marriages of one cross type")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--m", required=True)
    sp.add_argument("--cross", default="", help="cross counts like c12=9,c13=7,c23=5")
    sp.set_defaults(func=cmd_coeff)

    sp = sub.add_parser("table", help="write a table of symbolic moments")
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--grid", type=int, help="all indices with 1 <= m_i <= N")
    sp.add_argument("--diagonal", type=int, help="indices (2t,...,2t) for t = 1..N")
    sp.add_argument("--cov", default="symbolic")
    sp.add_argument("--engine", choices=ENGINES, default="wick")
    sp.add_argument("--out", help="output file (default stdout)")
    cache_flags(sp)
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("discover", help="discover and verify a pure recurrence")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--direction", type=int, required=True)
    sp.add_argument("--fixed", default="", help="other coordinates, e.g. m2=0 or m1=4,m2=4")
    sp.add_argument("--cov", default="symbolic")
    sp.add_argument("--max-order", type=int, default=SearchLimits.max_order)
    sp.add_argument("--max-degree", type=int, default=SearchLimits.max_degree)
    sp.add_argument("--out", help="write the recurrence JSON here (default stdout)")
    sp.set_defaults(func=cmd_discover)

    sp = sub.add_parser("bench", help="time pure against wick on a reference case")
    sp.add_argument("--case", choices=sorted(BENCH_CASES), required=True)
    sp.add_argument("--repeat", type=int, default=1)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "k", 1) is not None and getattr(args, "k", 1) < 1:
        parser.error("--k must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
