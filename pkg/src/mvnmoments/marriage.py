"""Counting complete marriage pairings in a k-gender society.

With ``m_i`` people of gender ``i``, the number of ways everyone can marry
with exactly ``a_ij`` couples between genders ``i`` and ``j`` (the remaining
``b_i`` couples of each gender being same-gender) is the coefficient of
``prod c_ij^a_ij`` in the symbolic moment ``M(m)``.
"""
from __future__ import annotations

from itertools import combinations
from typing import Mapping, Sequence

from gmpy2 import mpz

from .covariance import CovarianceSpec
from .exact_poly import Polynomial, parse_var
from .wick import _Factorials

ENGINES = ("wick", "stein", "pure")


def _cross_map(k: int, cross: Mapping) -> dict:
    out = {}
    for key, val in cross.items():
        v = parse_var(key) if isinstance(key, str) else (int(key[0]), int(key[1]))
        i, j = v
        if not 1 <= i < j <= k:
            raise ValueError(f"pair {v} is not a valid i<j pair for k={k}")
        if int(val) < 0:
            raise ValueError(f"count for {v} must be nonnegative")
        out[v] = out.get(v, 0) + int(val)
    return out


def count_marriages(m: Sequence[int], cross: Mapping) -> int:
    """Number of perfect matchings of type ``cross`` (keys ``(i, j)`` or ``"cij"``).

    Closed form ``prod m_i! / (prod a_ij! * prod 2^b_i b_i!)``; infeasible
    demands (negative or odd remainders) give 0.
    """
    m = tuple(int(x) for x in m)
    if any(x < 0 for x in m):
        raise ValueError("multi-index entries must be nonnegative")
    k = len(m)
    a = _cross_map(k, cross)
    left = list(m)
    for (i, j), x in a.items():
        left[i - 1] -= x
        left[j - 1] -= x
    if any(r < 0 or r % 2 for r in left):
        return 0
    fact = _Factorials()
    num = mpz(1)
    for x in m:
        num *= fact[x]
    den = mpz(1)
    for x in a.values():
        den *= fact[x]
    for r in left:
        den *= (mpz(1) << (r // 2)) * fact[r // 2]
    return int(num // den)


def cross_types(m: Sequence[int]):
    """Every feasible ``{(i, j): a_ij}`` for ``m`` (zero counts omitted)."""
    m = tuple(int(x) for x in m)
    pairs = list(combinations(range(1, len(m) + 1), 2))
    left = list(m)
    acc: dict = {}

    def rec(idx):
        if idx == len(pairs):
            if all(r % 2 == 0 for r in left):
                yield dict(acc)
            return
        i, j = pairs[idx]
        for x in range(min(left[i - 1], left[j - 1]) + 1):
            left[i - 1] -= x
            left[j - 1] -= x
            if x:
                acc[(i, j)] = x
            yield from rec(idx + 1)
            acc.pop((i, j), None)
            left[i - 1] += x
            left[j - 1] += x

    yield from rec(0)


def marriage_polynomial(m: Sequence[int], engine: str = "wick") -> Polynomial:
    """Full symbolic moment: the coefficient of ``prod c_ij^a_ij`` counts marriages of that type."""
    from .pure import moment_pure
    from .stein import moment_stein
    from .wick import moment_wick

    fns = {"wick": moment_wick, "stein": moment_stein, "pure": moment_pure}
    if engine not in fns:
        raise ValueError(f"engine must be one of {ENGINES}")
    cov = CovarianceSpec.symbolic(len(m))
    return fns[engine](cov, m)
