"""Memoized mixed recurrence from Gaussian integration by parts.

For any coordinate ``i`` with ``m_i >= 1``,

    M(m) = sum_j c_ij * (m_j - [j == i]) * M(m - e_i - e_j),   c_ii = 1,

with ``M(0) = 1``.  Internally values are kept as integers scaled by
``L ** (|m| / 2)`` where ``L`` is the common denominator of the numeric
correlations, so no rational arithmetic happens inside the recursion.
"""
from __future__ import annotations

from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from gmpy2 import mpq, mpz

from .covariance import SYMBOLIC, CovarianceSpec, check_index
from .exact_poly import Monomial, Polynomial

Pivot = Union[str, Callable[[Tuple[int, ...]], int]]


def _pivot_smallest(m: Tuple[int, ...]) -> int:
    best = -1
    for i, x in enumerate(m):
        if x and (best < 0 or x < m[best]):
            best = i
    return best


def _pivot_largest(m: Tuple[int, ...]) -> int:
    best = -1
    for i, x in enumerate(m):
        if x and (best < 0 or x > m[best]):
            best = i
    return best


_PIVOTS = {"smallest": _pivot_smallest, "largest": _pivot_largest}


class SteinContext:
    """One evaluation context: a covariance plus its private memo table.

    ``pivot`` picks the coordinate to unwind; the default unwinds the smallest
    nonzero coordinate, which keeps the down-set small when one or two
    coordinates are much larger than the rest.  The value does not depend
    on the pivot.
    """

    def __init__(self, cov: CovarianceSpec, pivot: Pivot = "smallest", memoize: bool = True):
        self.cov = cov
        self.k = cov.k
        self.memoize = memoize
        self._pivot = _PIVOTS[pivot] if isinstance(pivot, str) else pivot
        self.scale = mpz(cov.common_denominator())
        self.numeric = cov.is_numeric
        self.sym_pairs = cov.symbolic_pairs()
        sym_index = {v: n for n, v in enumerate(self.sym_pairs)}
        # weight[i][j] = (L * c_ij as integer, symbol slot or -1)
        self.weight: List[List[Tuple[mpz, int]]] = []
        for i in range(self.k):
            row = []
            for j in range(self.k):
                if i == j:
                    row.append((self.scale, -1))
                    continue
                e = cov.entry(i + 1, j + 1)
                if e == SYMBOLIC:
                    row.append((self.scale, sym_index[(min(i, j) + 1, max(i, j) + 1)]))
                else:
                    w = e * self.scale
                    row.append((mpz(w.numerator), -1))
            self.weight.append(row)
        self._zero = mpz(0) if self.numeric else {}
        self._one = mpz(1) if self.numeric else {(0,) * len(self.sym_pairs): mpz(1)}
        self._memo: Dict[Tuple[int, ...], object] = {}
        self._lines: Dict[Tuple[int, Tuple[int, ...]], Tuple[int, list]] = {}
        self.nodes_computed = 0

    # scaled-value algebra
    def _combine(self, parts) -> object:
        if self.numeric:
            s = mpz(0)
            for w, _, v in parts:
                s += w * v
            return s
        out: Dict[Tuple[int, ...], mpz] = {}
        for w, slot, v in parts:
            if not w:
                continue
            for key, c in v.items():
                if slot >= 0:
                    key = key[:slot] + (key[slot] + 1,) + key[slot + 1:]
                out[key] = out.get(key, 0) + w * c
        return {key: c for key, c in out.items() if c}

    def _children(self, m: Tuple[int, ...]):
        i = self._pivot(m)
        kids = []
        row = self.weight[i]
        for j in range(self.k):
            mult = m[j] - (1 if j == i else 0)
            if mult <= 0:
                continue
            w, slot = row[j]
            if not w:
                continue
            child = list(m)
            child[i] -= 1
            child[j] -= 1
            kids.append((w * mult, slot, tuple(child)))
        return kids

    def scaled(self, m: Sequence[int]):
        """Scaled internal value ``L^(|m|/2) * M(m)``."""
        m = tuple(m)
        if sum(m) % 2:
            return self._zero
        if not self.memoize:
            return self._plain(m)
        memo = self._memo
        if m in memo:
            return memo[m]
        stack = [m]
        while stack:
            node = stack[-1]
            if node in memo:
                stack.pop()
                continue
            if not any(node):
                memo[node] = self._one
                stack.pop()
                continue
            kids = self._children(node)
            missing = [c for _, _, c in kids if c not in memo]
            if missing:
                stack.extend(missing)
                continue
            memo[node] = self._combine([(w, s, memo[c]) for w, s, c in kids])
            self.nodes_computed += 1
            stack.pop()
        return memo[m]

    def _plain(self, m: Tuple[int, ...]):
        # unmemoized recursion; exponential, for small transparency checks
        if sum(m) % 2:
            return self._zero
        if not any(m):
            return self._one
        self.nodes_computed += 1
        return self._combine([(w, s, self._plain(c)) for w, s, c in self._children(m)])

    def to_polynomial(self, value, total: int) -> Polynomial:
        den = self.scale ** (total // 2)
        if self.numeric:
            return Polynomial.constant(mpq(value, den))
        return Polynomial({Monomial(zip(self.sym_pairs, key)): mpq(c, den) for key, c in value.items()})

    def to_field(self, value, total: int):
        """Numeric covariances give a bare rational, symbolic ones a Polynomial."""
        if self.numeric:
            return mpq(value, self.scale ** (total // 2))
        return self.to_polynomial(value, total)

    def moment(self, m: Sequence[int]) -> Polynomial:
        m = check_index(self.cov, m)
        return self.to_polynomial(self.scaled(m), sum(m))

    # lines along one direction
    def line(self, direction: int, fixed: Sequence[int], upto: int) -> list:
        """Scaled values ``M(fixed with hole := n)`` for ``n = 0..upto``.

        ``direction`` is 1-based and ``fixed`` lists the other ``k - 1``
        coordinates.  The values come from a layered sweep that unwinds the
        ``direction`` coordinate; the result is cached and extended by
        horizon doubling on later calls.
        """
        d = direction - 1
        fixed = tuple(int(x) for x in fixed)
        if len(fixed) != self.k - 1:
            raise ValueError(f"fixed must have {self.k - 1} entries")
        if any(x < 0 for x in fixed):
            raise ValueError("fixed coordinates must be nonnegative")
        key = (d, fixed)
        have = self._lines.get(key)
        if have is not None and have[0] >= upto:
            return have[1][: upto + 1]
        horizon = upto if have is None else max(upto, 2 * have[0])
        others = [j for j in range(self.k) if j != d]
        layers = self._sweep(d, others, fixed, horizon, horizon, keep=-1)
        zero = self._zero
        values = [layers.get((0,) * len(others) + (horizon - n,), zero) for n in range(horizon + 1)]
        self._lines[key] = (horizon, values)
        return values[: upto + 1]

    def _region(self, coords: List[int], corner: Tuple[int, ...], radius: int) -> Dict[Tuple[int, ...], object]:
        """Scaled values at ``corner - delta`` (remaining coordinates zero) for
        ``0 <= delta <= corner``, ``|delta| <= radius``, keyed by ``delta``."""
        if not coords:
            return {(): self._one}
        pos = min(range(len(coords)), key=lambda t: (corner[t], t))
        u = coords[pos]
        rest = coords[:pos] + coords[pos + 1:]
        corner_r = corner[:pos] + corner[pos + 1:]
        top = corner[pos]
        out = self._sweep(u, rest, corner_r, top, radius + top, keep=radius)
        # reorder (delta_rest..., delta_u) into coordinate order
        return {key[:pos] + (key[-1],) + key[pos:-1]: v for key, v in out.items()}

    def _sweep(self, u: int, rest: List[int], corner: Tuple[int, ...], top: int, horizon: int, keep: int):
        """Unwind coordinate ``u`` for layers ``n = 0..top``; layer ``n`` covers
        ``|delta| <= horizon - n``.  Returns values with ``|delta| + top - n <= keep``
        keyed by ``delta + (top - n,)``; ``keep < 0`` returns ``delta == 0`` on every layer."""
        r = len(rest)
        base = self._region(rest, corner, horizon)
        if not r:
            table = [((), 0, (), ())]
        else:
            # dense mixed-radix index so that delta + e_j <-> idx + stride[j]
            strides = []
            acc = 1
            for c in corner:
                strides.append(acc)
                acc *= c + 2
            table = []
            for delta in _deltas(corner, horizon):
                idx = sum(x * s for x, s in zip(delta, strides))
                table.append((delta, sum(delta), tuple(c - x for c, x in zip(corner, delta)), idx))
            table.sort(key=lambda t: t[1])
        wts = [self.weight[u][j] for j in rest]
        strides_r = strides if r else []
        parity0 = sum(corner) % 2
        zero = self._zero
        out = {}
        prev2: Dict[int, object] = {}
        prev1: Dict[int, object] = {}
        numeric = self.numeric
        scale = self.scale
        for n in range(top + 1):
            cur: Dict[int, object] = {}
            limit = horizon - n
            want = keep - (top - n) if keep >= 0 else 0
            for delta, size, left, idx in table:
                if size > limit:
                    break
                if (parity0 + size + n) % 2:
                    continue
                if n == 0:
                    v = base.get(delta, zero)
                elif numeric:
                    v = scale * (n - 1) * prev2[idx] if n >= 2 else mpz(0)
                    for j in range(r):
                        lj = left[j]
                        if lj:
                            w = wts[j][0]
                            if w:
                                v += w * lj * prev1[idx + strides_r[j]]
                    self.nodes_computed += 1
                else:
                    parts = []
                    if n >= 2:
                        parts.append((scale * (n - 1), -1, prev2[idx]))
                    for j in range(r):
                        lj = left[j]
                        if lj:
                            w, slot = wts[j]
                            if w:
                                parts.append((w * lj, slot, prev1[idx + strides_r[j]]))
                    v = self._combine(parts)
                    self.nodes_computed += 1
                cur[idx] = v
                if size <= want:
                    out[delta + (top - n,)] = v
            prev2, prev1 = prev1, cur
        return out


def _deltas(corner: Tuple[int, ...], radius: int):
    """All ``delta`` with ``0 <= delta <= corner`` and ``|delta| <= radius``."""
    r = len(corner)
    acc = [0] * r

    def rec(i, left):
        if i == r:
            yield tuple(acc)
            return
        for x in range(min(left, corner[i]) + 1):
            acc[i] = x
            yield from rec(i + 1, left - x)
        acc[i] = 0

    yield from rec(0, radius)


def moment_stein(cov: CovarianceSpec, m: Sequence[int], pivot: Pivot = "smallest", memoize: bool = True) -> Polynomial:
    """Exact mixed moment via the memoized mixed recurrence (fresh context per call)."""
    return SteinContext(cov, pivot=pivot, memoize=memoize).moment(m)


def seed_sequence(
    cov: CovarianceSpec,
    direction: int,
    fixed: Sequence[int],
    start: int,
    count: int,
    step: int = 2,
    context: Optional[SteinContext] = None,
) -> List[Polynomial]:
    """``[M(fixed with hole := start + t*step) for t < count]`` from one shared memo table."""
    if count < 1:
        raise ValueError("count must be at least 1")
    if step not in (1, 2):
        raise ValueError("step must be 1 or 2")
    if start < 0:
        raise ValueError("start must be nonnegative")
    ctx = context if context is not None else SteinContext(cov)
    if ctx.cov != cov:
        raise ValueError("context was built for a different covariance")
    last = start + (count - 1) * step
    values = ctx.line(direction, fixed, last)
    base = sum(fixed)
    return [ctx.to_polynomial(values[n], base + n) for n in range(start, last + 1, step)]
