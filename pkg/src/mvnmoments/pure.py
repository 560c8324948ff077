"""Guess-and-verify discovery of pure recurrences and linear-time moment evaluation.

Along one coordinate direction, with the other coordinates frozen, the
moments on the parity sublattice satisfy a linear recurrence whose
coefficients are polynomials in the running index.  ``discover`` fits such a
recurrence to values produced by the mixed recurrence, checks it on held-out
points, and ``moment_pure`` then walks a constant-size window up to the
target index.
"""
from __future__ import annotations

import hashlib
import logging
import os
import random
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .covariance import CovarianceSpec, check_index
from .exact_poly import Polynomial
from .linalg import modular_nullspace, nullspace, primes, rank_mod, residue
from .recurrence import EvalStats, Recurrence, evaluate, verify
from .stein import SteinContext
from .wick import moment_wick

log = logging.getLogger(__name__)

HOLDOUT = 16


class NotFound(LookupError):
    """No recurrence within the search limits."""

    def __init__(self, message: str, tried: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.tried = tried


@dataclass(frozen=True)
class SearchLimits:
    max_order: int = 8
    max_degree: int = 12
    holdout: int = HOLDOUT
    # fraction-field fitting is only attempted with this many symbols or fewer
    max_symbols: int = 1

    def __post_init__(self):
        if self.max_order < 1 or self.max_degree < 0 or self.holdout < 1:
            raise ValueError("search limits must be positive")

    def candidates(self) -> List[Tuple[int, int]]:
        cands = [(o, d) for o in range(1, self.max_order + 1) for d in range(self.max_degree + 1)]
        return sorted(cands, key=lambda od: (od[0] + od[1], od[0]))


class _Sequence:
    """Moments along one sublattice line, in the recurrence's coefficient field."""

    def __init__(self, ctx: SteinContext, direction: int, fixed: Tuple[int, ...], offset: int, step: int = 2):
        self.ctx = ctx
        self.direction = direction
        self.fixed = fixed
        self.offset = offset
        self.step = step
        self.base = sum(fixed)
        self._values: List[object] = []

    def index(self, s: int) -> int:
        return self.offset + s * self.step

    def __getitem__(self, s: int):
        if s >= len(self._values):
            upto = self.index(max(s, 2 * len(self._values)))
            raw = self.ctx.line(self.direction, self.fixed, upto)
            self._values = [
                self.ctx.to_field(raw[self.index(t)], self.base + self.index(t))
                for t in range((upto - self.offset) // self.step + 1)
            ]
        return self._values[s]

    def at(self, n: int):
        if (n - self.offset) % self.step or n < self.offset:
            raise ValueError(f"index {n} is off the sublattice")
        return self[(n - self.offset) // self.step]


def _residue_fn(cov: CovarianceSpec, p: int, rng: random.Random):
    if cov.is_numeric:
        return lambda x: residue(x, p)
    point = {v: rng.randrange(1, p) for v in cov.symbolic_pairs()}

    def res(poly: Polynomial):
        total = 0
        for mono, c in poly.items():
            r = residue(c, p)
            for v, e in mono.items():
                r = r * pow(point[v], e, p) % p
            total += r
        return total % p

    return res


def discover(
    cov: CovarianceSpec,
    direction: int,
    fixed: Sequence[int],
    limits: SearchLimits = SearchLimits(),
    context: Optional[SteinContext] = None,
) -> Recurrence:
    """Find a verified pure recurrence along ``direction`` (1-based) with the
    other coordinates frozen at ``fixed``.

    Candidates ``(order, degree)`` are tried by increasing ``order + degree``,
    then ``order``.  Each candidate fits ``(order+1)(degree+1)`` unknowns to
    that many relations plus ``holdout`` more; a nullspace vector is accepted
    only if the relation then holds on ``holdout`` further indices.
    """
    k = cov.k
    fixed = tuple(int(x) for x in fixed)
    if not 1 <= direction <= k:
        raise ValueError(f"direction must be in 1..{k}")
    if len(fixed) != k - 1:
        raise ValueError(f"fixed must have {k - 1} entries")
    nsym = len(cov.symbolic_pairs())
    if nsym > limits.max_symbols:
        raise NotFound(f"{nsym} symbolic entries exceed max_symbols={limits.max_symbols}", None)
    ctx = context if context is not None else SteinContext(cov)
    offset = sum(fixed) % 2
    step = 2
    seq = _Sequence(ctx, direction, fixed, offset, step)
    G = limits.holdout
    rng = random.Random(0x5EED)
    p = next(primes(1 << 61))
    res = _residue_fn(cov, p, rng)
    residues: Dict[int, int] = {}

    def rs(s):
        if s not in residues:
            residues[s] = res(seq[s])
        return residues[s]

    tried = None
    for order, degree in limits.candidates():
        tried = (order, degree)
        unknowns = (order + 1) * (degree + 1)
        nrows = unknowns + G
        # relation r sits at sublattice position s = order + r
        seq[order + nrows + G - 1]
        probe = []
        for r in range(nrows):
            s = order + r
            n = seq.index(s)
            npow = [pow(n, e, p) for e in range(degree + 1)]
            probe.append([rs(s - t) * npow[e] % p for t in range(order + 1) for e in range(degree + 1)])
        if rank_mod(probe, p) == unknowns:
            continue
        exact = []
        for r in range(nrows):
            s = order + r
            n = seq.index(s)
            exact.append([seq[s - t] * n**e for t in range(order + 1) for e in range(degree + 1)])
        basis = modular_nullspace(exact) if cov.is_numeric else nullspace(exact)
        vec = next((v for v in basis if any(v[: degree + 1])), None)
        if vec is None:
            continue
        coeffs = tuple(tuple(vec[t * (degree + 1): (t + 1) * (degree + 1)]) for t in range(order + 1))
        rec = Recurrence(k, direction, step, order, offset, fixed, cov, coeffs, fit_points=nrows).canonical()
        if not verify(rec, seq.at, G):
            log.info("candidate (%d, %d) failed held-out verification", order, degree)
            continue
        log.info("discovered %s", rec.summary())
        return rec
    raise NotFound(f"no recurrence with order <= {limits.max_order}, degree <= {limits.max_degree}", tried)


class RecurrenceCache:
    """Get-or-compute map of discovered recurrences, optionally persisted as JSON files.

    Concurrent duplicate discovery is tolerated; recurrences are canonical,
    so the last write stores the same content.
    """

    def __init__(self, directory: Optional[os.PathLike] = None):
        self.directory = Path(directory) if directory else None
        self._mem: Dict[str, Recurrence] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(cov: CovarianceSpec, direction: int, fixed: Sequence[int]) -> str:
        return f"k={cov.k};dir={direction};fixed={','.join(map(str, fixed))};cov={cov.fingerprint()}"

    def _path(self, key: str) -> Path:
        return self.directory / (hashlib.sha256(key.encode()).hexdigest()[:32] + ".json")

    def get(self, key: str) -> Optional[Recurrence]:
        with self._lock:
            rec = self._mem.get(key)
        if rec is None and self.directory is not None:
            path = self._path(key)
            if path.exists():
                rec = Recurrence.from_json(path.read_text())
                with self._lock:
                    self._mem[key] = rec
        return rec

    def put(self, key: str, rec: Recurrence) -> None:
        with self._lock:
            self._mem[key] = rec
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                fh.write(rec.dumps())
            os.replace(tmp, self._path(key))

    def get_or_discover(self, cov, direction, fixed, limits: SearchLimits, context=None) -> Recurrence:
        key = self.key(cov, direction, fixed)
        rec = self.get(key)
        if rec is not None:
            self.hits += 1
            return rec
        self.misses += 1
        rec = discover(cov, direction, fixed, limits, context=context)
        self.put(key, rec)
        return rec

    def __len__(self) -> int:
        return len(self._mem)


DEFAULT_CACHE = RecurrenceCache()


@dataclass
class PureResult:
    value: Polynomial
    engine: str = "pure"
    fallback_used: bool = False
    reason: str = ""
    recurrence: Optional[Recurrence] = None
    stats: EvalStats = field(default_factory=EvalStats)

    def metadata(self) -> dict:
        meta = {"fallback_used": self.fallback_used}
        if self.recurrence is not None:
            meta["recurrence_order"] = self.recurrence.order
            meta["recurrence_degree"] = self.recurrence.degree
            meta["direction"] = self.recurrence.direction
        if self.fallback_used:
            meta["fallback_engine"] = self.engine
            meta["reason"] = self.reason
        return meta


def _fallback(cov: CovarianceSpec, m: Tuple[int, ...], how: str, ctx: SteinContext, reason: str) -> PureResult:
    if how == "auto":
        how = "stein" if cov.is_numeric else "wick"
    if how not in ("stein", "wick"):
        raise ValueError(f"unknown fallback engine {how!r}")
    log.info("pure recurrence unavailable (%s); falling back to %s", reason, how)
    value = ctx.moment(m) if how == "stein" else moment_wick(cov, m)
    return PureResult(value, engine=how, fallback_used=True, reason=reason)


def pure_moment(
    cov: CovarianceSpec,
    m: Sequence[int],
    limits: SearchLimits = SearchLimits(),
    cache: Optional[RecurrenceCache] = None,
    fallback: Optional[str] = "stein",
    stats: Optional[EvalStats] = None,
) -> PureResult:
    """``moment_pure`` with its metadata.

    When discovery fails the value comes from ``fallback``: ``"stein"``
    (default), ``"wick"``, ``"auto"`` (stein for numeric covariances, wick for
    symbolic ones) or ``None`` to let :class:`NotFound` propagate.
    """
    m = check_index(cov, m)
    if sum(m) % 2:
        return PureResult(Polynomial.zero())
    cache = DEFAULT_CACHE if cache is None else cache
    d = max(range(cov.k), key=lambda i: (m[i], -i))
    direction = d + 1
    fixed = m[:d] + m[d + 1:]
    target = m[d]
    ctx = SteinContext(cov)
    try:
        rec = cache.get_or_discover(cov, direction, fixed, limits, context=ctx)
    except NotFound as exc:
        if fallback is None:
            raise
        return _fallback(cov, m, fallback, ctx, str(exc))
    stats = stats if stats is not None else EvalStats()
    seq = _Sequence(ctx, direction, fixed, rec.offset, rec.step)
    seeds = [(seq.index(s), seq[s]) for s in range(rec.order)]
    if target <= seeds[-1][0]:
        value = seq.at(target)
    else:
        def bridge(n):
            return ctx.to_field(ctx.scaled(rec.point(n)), sum(fixed) + n)

        value = evaluate(rec, seeds, target, bridge=bridge, stats=stats)
    if not isinstance(value, Polynomial):
        value = Polynomial.constant(value)
    return PureResult(value, recurrence=rec, stats=stats)


def moment_pure(cov: CovarianceSpec, m: Sequence[int], **kwargs) -> Polynomial:
    """Exact mixed moment through a discovered pure recurrence (linear in ``max(m)``)."""
    return pure_moment(cov, m, **kwargs).value
