"""Ground-truth moments from the moment generating function (Wick/Isserlis sum).

Expanding ``exp(t^T C t / 2)`` and reading off the ``t^m / m!`` coefficient
gives a sum over *pairing types*: ``a[i,j]`` cross pairs between coordinates
``i`` and ``j`` and ``b[i]`` same-coordinate pairs, weighted by

    prod(m_i!) / (prod(a_ij!) * prod(2^b_i * b_i!)) * prod(c_ij^a_ij).

The weight is the number of perfect matchings of that type, so every
coefficient of a symbolic moment is a nonnegative integer.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

from gmpy2 import mpq, mpz

from .covariance import SYMBOLIC, CovarianceSpec, check_index
from .exact_poly import ExactRational, Monomial, Polynomial, Var

BRUTEFORCE_LIMIT = 12


class SizeGuardError(ValueError):
    """Instance too large for literal matching enumeration."""


def univariate_moment(r: int) -> ExactRational:
    """E[x^r] for a standard normal: 0 for odd r, r!/(2^(r/2) (r/2)!) otherwise."""
    if r < 0:
        raise ValueError("order must be nonnegative")
    if r % 2:
        return mpq(0)
    h = r // 2
    fact = _Factorials()
    return mpq(fact[r], (mpz(1) << h) * fact[h])


class _Factorials:
    """Per-call factorial table, grown on demand."""

    def __init__(self):
        self._table = [mpz(1)]

    def __getitem__(self, n: int) -> mpz:
        t = self._table
        while len(t) <= n:
            t.append(t[-1] * len(t))
        return t[n]


@dataclass(frozen=True)
class PairingType:
    """Aggregate of a perfect matching: cross-pair counts ``a`` and same-coordinate counts ``b``."""

    a: Tuple[Tuple[Var, int], ...]
    b: Tuple[int, ...]

    @property
    def cross(self) -> Dict[Var, int]:
        return dict(self.a)

    def monomial(self) -> Monomial:
        return Monomial(self.a)


def _parity_patterns(m: Sequence[int], pairs: Sequence[Tuple[int, int]]) -> Iterator[Tuple[int, ...]]:
    for eps in product((0, 1), repeat=len(pairs)):
        deg = [0] * len(m)
        for (i, j), e in zip(pairs, eps):
            deg[i] += e
            deg[j] += e
        if all(d <= mi and (mi - d) % 2 == 0 for d, mi in zip(deg, m)):
            yield eps


def enumerate_pairing_types(m: Sequence[int]) -> Iterator[PairingType]:
    """Every pairing type of the multi-index ``m`` exactly once (nothing if the total is odd)."""
    m = tuple(int(x) for x in m)
    k = len(m)
    if sum(m) % 2:
        return
    pairs = list(combinations(range(k), 2))
    for eps in _parity_patterns(m, pairs):
        a = list(eps)
        left = list(m)
        for (i, j), e in zip(pairs, eps):
            left[i] -= e
            left[j] -= e

        def rec(level):
            if level == len(pairs):
                yield PairingType(
                    tuple(((i + 1, j + 1), x) for (i, j), x in zip(pairs, a) if x),
                    tuple(r // 2 for r in left),
                )
                return
            i, j = pairs[level]
            start = a[level]
            saved = left[i], left[j]
            while True:
                yield from rec(level + 1)
                if left[i] < 2 or left[j] < 2:
                    break
                a[level] += 2
                left[i] -= 2
                left[j] -= 2
            a[level] = start
            left[i], left[j] = saved

        yield from rec(0)


def pairing_count(m: Sequence[int], t: PairingType) -> int:
    """Number of perfect matchings of the labelled multiset ``m`` having type ``t``."""
    fact = _Factorials()
    num = mpz(1)
    for x in m:
        num *= fact[x]
    den = mpz(1)
    for _, x in t.a:
        den *= fact[x]
    for x in t.b:
        den *= (mpz(1) << x) * fact[x]
    q, r = divmod(num, den)
    assert r == 0
    return int(q)


def moment_wick(cov: CovarianceSpec, m: Sequence[int]) -> Polynomial:
    """Exact mixed moment ``M_C(m)`` as a polynomial in the symbolic entries of ``cov``.

    Numeric entries are substituted, so an all-numeric covariance gives a
    constant polynomial.  Pairing types are visited in odometer order with
    each term obtained from its predecessor by an exact integer ratio.
    """
    m = check_index(cov, m)
    k = cov.k
    if sum(m) % 2:
        return Polynomial.zero()
    pairs = list(combinations(range(k), 2))
    if not pairs:
        return Polynomial.constant(univariate_moment(m[0]))

    sym_pos = []  # for each pair: index into the symbolic exponent key, or -1
    pq = []  # for each pair: (p, q) with entry p/q, or None when symbolic
    nsym = 0
    for (i, j) in pairs:
        e = cov.entry(i + 1, j + 1)
        if e == SYMBOLIC:
            sym_pos.append(nsym)
            nsym += 1
            pq.append(None)
        else:
            sym_pos.append(-1)
            pq.append((mpz(e.numerator), mpz(e.denominator)))
    cap = [min(m[i], m[j]) for (i, j) in pairs]
    scale = mpz(1)
    for w, A in zip(pq, cap):
        if w is not None:
            scale *= w[1] ** A

    fact = _Factorials()
    top = mpz(1)
    for x in m:
        top *= fact[x]

    acc: Dict[Tuple[int, ...], mpz] = {}
    npairs = len(pairs)
    last = npairs - 1

    for eps in _parity_patterns(m, pairs):
        a = list(eps)
        b = list(m)
        for (i, j), e in zip(pairs, eps):
            b[i] -= e
            b[j] -= e
        b = [x // 2 for x in b]
        den = mpz(1)
        for x in b:
            den *= (mpz(1) << x) * fact[x]
        T = top // den
        for w, e, A in zip(pq, eps, cap):
            if w is not None:
                T *= w[0] ** e * w[1] ** (A - e)
        if not T:
            continue
        key = [0] * nsym
        for p_idx, e in enumerate(eps):
            if sym_pos[p_idx] >= 0:
                key[sym_pos[p_idx]] = e

        def rec(level: int, T: mpz) -> None:
            i, j = pairs[level]
            w = pq[level]
            sp = sym_pos[level]
            a0, bi0, bj0 = a[level], b[i], b[j]
            if level == last:
                # innermost odometer digit, unrolled
                ai, bi, bj = a0, bi0, bj0
                if sp < 0:
                    kt = tuple(key)
                    total = acc.get(kt, mpz(0))
                    if w is None:
                        pp = qq = 1
                    else:
                        pp, qq = w[0] * w[0], w[1] * w[1]
                    while True:
                        total += T
                        if not bi or not bj:
                            break
                        T = T * (4 * bi * bj * pp) // ((ai + 1) * (ai + 2) * qq)
                        if not T:
                            break
                        bi -= 1
                        bj -= 1
                        ai += 2
                    acc[kt] = total
                else:
                    while True:
                        key[sp] = ai
                        kt = tuple(key)
                        acc[kt] = acc.get(kt, 0) + T
                        if not bi or not bj:
                            break
                        T = T * (4 * bi * bj) // ((ai + 1) * (ai + 2))
                        bi -= 1
                        bj -= 1
                        ai += 2
                    key[sp] = a0
                return
            while True:
                if sp >= 0:
                    key[sp] = a[level]
                rec(level + 1, T)
                bi, bj = b[i], b[j]
                if not bi or not bj:
                    break
                ai = a[level]
                if w is None:
                    T = T * (4 * bi * bj) // ((ai + 1) * (ai + 2))
                else:
                    T = T * (4 * bi * bj * w[0] * w[0]) // ((ai + 1) * (ai + 2) * w[1] * w[1])
                b[i] -= 1
                b[j] -= 1
                a[level] += 2
                if not T:
                    break
            a[level], b[i], b[j] = a0, bi0, bj0
            if sp >= 0:
                key[sp] = a0

        rec(0, T)

    sym_pairs = [(i + 1, j + 1) for p_idx, (i, j) in enumerate(pairs) if sym_pos[p_idx] >= 0]
    terms = {}
    for kt, total in acc.items():
        if total:
            terms[Monomial(zip(sym_pairs, kt))] = mpq(total, scale)
    return Polynomial(terms)


def moment_from_types(cov: CovarianceSpec, m: Sequence[int]) -> Polynomial:
    """Same value as :func:`moment_wick`, summed type by type (slow, for cross-checks)."""
    m = check_index(cov, m)
    total = Polynomial.zero()
    for t in enumerate_pairing_types(m):
        term = Polynomial.constant(pairing_count(m, t))
        for (i, j), x in t.a:
            term = term * cov.as_polynomial(i, j) ** x
        total = total + term
    return total


def _matchings(labels: List[int]) -> Iterator[List[Tuple[int, int]]]:
    if not labels:
        yield []
        return
    first, rest = labels[0], labels[1:]
    for idx, other in enumerate(rest):
        for tail in _matchings(rest[:idx] + rest[idx + 1:]):
            yield [(first, other)] + tail


def moment_bruteforce(cov: CovarianceSpec, m: Sequence[int]) -> Polynomial:
    """Literal Wick sum over all perfect matchings of the ``sum(m)`` labelled points."""
    m = check_index(cov, m)
    if sum(m) > BRUTEFORCE_LIMIT:
        raise SizeGuardError(f"sum(m)={sum(m)} exceeds the brute-force limit {BRUTEFORCE_LIMIT}")
    labels = [i for i, x in enumerate(m, start=1) for _ in range(x)]
    numeric = cov.numeric_pairs()
    terms: Dict[Monomial, ExactRational] = {}
    for matching in _matchings(labels):
        weight = mpq(1)
        exps: Dict[Var, int] = {}
        for u, v in matching:
            if u == v:
                continue
            pair = (min(u, v), max(u, v))
            if pair in numeric:
                weight *= numeric[pair]
            else:
                exps[pair] = exps.get(pair, 0) + 1
        mono = Monomial(exps)
        terms[mono] = terms.get(mono, mpq(0)) + weight
    return Polynomial(terms)
