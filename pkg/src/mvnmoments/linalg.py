"""Exact right nullspaces over the rationals and over polynomial rings.

``nullspace`` is the reference routine: exact-pivot Gauss-Jordan for rational
matrices, fraction-free (Bareiss) elimination for matrices of
:class:`Polynomial`.  ``modular_nullspace`` computes the same rational basis
by elimination modulo word-sized primes, Chinese remaindering and rational
reconstruction, and only returns a basis it has checked exactly.
"""
from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import gmpy2
from gmpy2 import mpq, mpz

from .exact_poly import ExactRational, Monomial, Polynomial, rational

log = logging.getLogger(__name__)

Matrix = Sequence[Sequence[object]]


class ModularFailure(RuntimeError):
    """Multimodular solve did not converge within its prime budget."""


def _is_poly_matrix(mat: Matrix) -> bool:
    return any(isinstance(x, Polynomial) for row in mat for x in row)


def _ncols(mat: Matrix) -> int:
    if not mat:
        return 0
    n = len(mat[0])
    if any(len(row) != n for row in mat):
        raise ValueError("matrix is not rectangular")
    return n


def nullspace(mat: Matrix, ncols: Optional[int] = None) -> list:
    """Exact basis of ``{x : mat @ x = 0}``; empty iff the nullspace is trivial.

    Rational input yields the reduced-row-echelon basis (each free variable
    set to 1 in turn).  Polynomial input yields polynomial vectors with
    integer content and common monomial factors removed.
    """
    n = _ncols(mat) if mat else (ncols or 0)
    if not mat:
        return [[mpq(int(i == j)) for i in range(n)] for j in range(n)]
    if _is_poly_matrix(mat):
        return _poly_nullspace([[x if isinstance(x, Polynomial) else Polynomial.constant(x) for x in row] for row in mat])
    return _rational_nullspace([[rational(x) for x in row] for row in mat])


def rref(mat: Matrix) -> Tuple[List[List[ExactRational]], List[int]]:
    rows = [[rational(x) for x in row] for row in mat]
    nr, nc = len(rows), _ncols(rows)
    pivots = []
    r = 0
    for col in range(nc):
        piv = next((i for i in range(r, nr) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nr):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == nr:
            break
    return rows, pivots


def _basis_from_rref(rows, pivots, nc, one, zero, neg):
    free = [c for c in range(nc) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [zero] * nc
        v[f] = one
        for r, pc in enumerate(pivots):
            v[pc] = neg(rows[r][f])
        basis.append(v)
    return basis


def _rational_nullspace(rows):
    nc = len(rows[0])
    red, pivots = rref(rows)
    return _basis_from_rref(red, pivots, nc, mpq(1), mpq(0), lambda x: -x)


def _poly_nullspace(rows: List[List[Polynomial]]) -> List[List[Polynomial]]:
    nr, nc = len(rows), len(rows[0])
    rows = [list(r) for r in rows]
    prev = Polynomial.constant(1)
    pivots: List[int] = []
    r = 0
    for col in range(nc):
        if r == nr:
            break
        piv = next((i for i in range(r, nr) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        for i in range(r + 1, nr):
            a = rows[i][col]
            for j in range(col + 1, nc):
                rows[i][j] = (p * rows[i][j] - a * rows[r][j]).exact_div(prev)
            rows[i][col] = Polynomial.zero()
        prev = p
        pivots.append(col)
        r += 1
    basis = []
    pivset = set(pivots)
    for f in (c for c in range(nc) if c not in pivset):
        x = [Polynomial.zero()] * nc
        x[f] = Polynomial.constant(1)
        for idx in range(len(pivots) - 1, -1, -1):
            col = pivots[idx]
            s = Polynomial.zero()
            for j in range(col + 1, nc):
                if x[j] and rows[idx][j]:
                    s = s + rows[idx][j] * x[j]
            p = rows[idx][col]
            x = [v * p if v else v for v in x]
            x[col] = -s
        basis.append(normalize_vector(x))
    return basis


def normalize_vector(v: List[Polynomial]) -> List[Polynomial]:
    """Divide out integer content and the common monomial factor; make the
    first nonzero entry's leading coefficient positive."""
    nz = [x for x in v if x]
    if not nz:
        return v
    num = mpz(0)
    den = mpz(1)
    for x in nz:
        c = x.content()
        num = gmpy2.gcd(num, c.numerator)
        den = gmpy2.lcm(den, c.denominator)
    g = mpq(num, den)
    common = nz[0].monomial_content()
    for x in nz[1:]:
        mc = x.monomial_content()
        common = Monomial({var: min(e, mc.exponent(var)) for var, e in common.items() if mc.exponent(var)})
    if nz[0].leading_term()[1] < 0:
        g = -g
    out = [x.divide_monomial(common).scale(1 / g) if x else x for x in v]
    names = set()
    for x in nz:
        names.update(x.variables())
    if len(names) == 1:
        (var,) = names
        h = _univariate_gcd([_dense(x, var) for x in out if x])
        if len(h) > 1:
            hp = Polynomial({Monomial({var: e}): c for e, c in enumerate(h) if c})
            out = [x.exact_div(hp) if x else x for x in out]
            return normalize_vector(out)
    return out


def _dense(p: Polynomial, var) -> List[ExactRational]:
    coeffs = [mpq(0)] * (p.total_degree() + 1)
    for mono, c in p.items():
        coeffs[mono.exponent(var)] = c
    return coeffs


def _univariate_gcd(polys: List[List[ExactRational]]) -> List[ExactRational]:
    """Primitive integer gcd of dense univariate polynomials (lowest degree first)."""

    def trim(a):
        while a and not a[-1]:
            a.pop()
        return a

    def rem(a, b):
        a = list(a)
        while len(a) >= len(b):
            f = a[-1] / b[-1]
            shift = len(a) - len(b)
            for t, c in enumerate(b):
                a[shift + t] -= f * c
            trim(a)
        return a

    g = trim(list(polys[0]))
    for p in polys[1:]:
        b = trim(list(p))
        while b:
            g, b = b, rem(g, b)
        g = [c / g[-1] for c in g]
        if len(g) == 1:
            return g
    den = mpz(1)
    for c in g:
        den = gmpy2.lcm(den, c.denominator)
    return [c * den for c in g]


# modular machinery

def primes(start: int = 1 << 62):
    """Increasing supply of primes above ``start``."""
    p = mpz(start)
    while True:
        p = gmpy2.next_prime(p)
        yield int(p)


def residue(x: ExactRational, p: int) -> Optional[int]:
    den = int(x.denominator % p)
    if not den:
        return None
    return int(x.numerator % p) * pow(den, -1, p) % p


def rref_mod(rows: List[List[int]], p: int) -> Tuple[List[List[int]], List[int]]:
    rows = [list(r) for r in rows]
    nr = len(rows)
    nc = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for col in range(nc):
        piv = next((i for i in range(r, nr) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][col], -1, p)
        pr = [x * inv % p for x in rows[r]]
        rows[r] = pr
        for i in range(nr):
            if i != r:
                f = rows[i][col]
                if f:
                    rows[i] = [(a - f * b) % p for a, b in zip(rows[i], pr)]
        pivots.append(col)
        r += 1
        if r == nr:
            break
    return rows, pivots


def rank_mod(rows: List[List[int]], p: int) -> int:
    return len(rref_mod(rows, p)[1])


def rational_reconstruction(a: int, n: int) -> Optional[ExactRational]:
    """``r/s`` with ``r = a*s (mod n)`` and ``|r|, |s| <= sqrt(n/2)``, or ``None``."""
    a %= n
    bound = gmpy2.isqrt(n // 2)
    r0, r1 = mpz(n), mpz(a)
    s0, s1 = mpz(0), mpz(1)
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or gmpy2.gcd(r1, s1) != 1:
        return None
    return mpq(r1, s1)


def _pivot_rank(pivots: List[int]):
    # more pivots is better; among equals, the lexicographically smaller set
    return (-len(pivots), pivots)


def modular_nullspace(mat: Matrix, max_primes: int = 4000) -> List[List[ExactRational]]:
    """Same basis as ``nullspace`` for a rational matrix, via multimodular elimination."""
    rows = [[rational(x) for x in row] for row in mat]
    nc = _ncols(rows)
    if not rows:
        return nullspace(rows, nc)
    best = None
    modulus = mpz(1)
    acc: List[List[mpz]] = []
    last_guess = None
    used = 0
    for p in primes():
        used += 1
        if used > max_primes:
            raise ModularFailure(f"no stable reconstruction after {max_primes} primes")
        red = []
        ok = True
        for row in rows:
            rr = []
            for x in row:
                v = residue(x, p)
                if v is None:
                    ok = False
                    break
                rr.append(v)
            if not ok:
                break
            red.append(rr)
        if not ok:
            continue
        ech, pivots = rref_mod(red, p)
        if best is not None and _pivot_rank(pivots) > _pivot_rank(best):
            continue  # unlucky prime
        basis = _basis_from_rref(ech, pivots, nc, 1, 0, lambda x: (-x) % p)
        if not basis:
            return []
        if best is None or _pivot_rank(pivots) < _pivot_rank(best):
            best = pivots
            modulus = mpz(p)
            acc = [[mpz(x) for x in v] for v in basis]
            last_guess = None
        else:
            # CRT: x = acc (mod modulus), x = b (mod p)
            inv = pow(int(modulus % p), -1, p)
            for v_acc, v_new in zip(acc, basis):
                for t in range(nc):
                    a = v_acc[t]
                    v_acc[t] = a + modulus * ((v_new[t] - a) * inv % p)
            modulus *= p
        guess = []
        for v in acc:
            rv = [rational_reconstruction(int(x), int(modulus)) for x in v]
            if any(x is None for x in rv):
                guess = None
                break
            guess.append(rv)
        if guess is None:
            last_guess = None
            continue
        if guess == last_guess and _verify_null(rows, guess):
            log.debug("modular nullspace: %d primes, nullity %d", used, len(guess))
            return guess
        last_guess = guess
    raise ModularFailure("prime supply exhausted")  # pragma: no cover


def _verify_null(rows, basis) -> bool:
    for v in basis:
        den = mpz(1)
        for x in v:
            den = gmpy2.lcm(den, x.denominator)
        iv = [mpz(x * den) for x in v]
        nz = [(j, x) for j, x in enumerate(iv) if x]
        for row in rows:
            s = mpq(0)
            for j, x in nz:
                s += row[j] * x
            if s:
                return False
    return True
