from itertools import permutations, product

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from mvnmoments.covariance import CovarianceSpec, DimensionError
from mvnmoments.exact_poly import Monomial, Polynomial, parse_polynomial
from mvnmoments.wick import (
    SizeGuardError,
    enumerate_pairing_types,
    moment_bruteforce,
    moment_from_types,
    moment_wick,
    pairing_count,
    univariate_moment,
)

from conftest import rename

P = parse_polynomial


def test_univariate_examples():
    assert univariate_moment(3) == 0
    assert univariate_moment(4) == 3
    assert univariate_moment(0) == 1


def test_univariate_is_double_factorial():
    df = 1
    for r in range(2, 41, 2):
        df *= r - 1
        assert univariate_moment(r) == df
        assert univariate_moment(r - 1) == 0


def _types(m):
    return {(t.a, t.b) for t in enumerate_pairing_types(m)}


def test_pairing_type_examples():
    assert _types((1, 1)) == {((((1, 2), 1),), (0, 0))}
    assert _types((2, 2)) == {((), (1, 1)), ((((1, 2), 2),), (0, 0))}
    assert _types((1, 1, 2)) == {
        ((((1, 2), 1),), (0, 0, 1)),
        ((((1, 3), 1), ((2, 3), 1)), (0, 0, 0)),
    }


@pytest.mark.parametrize("m", [(3, 4, 5), (6, 2, 2), (2, 2, 2, 2), (5, 5)])
def test_pairing_types_balanced_and_unique(m):
    seen = set()
    total = 0
    for t in enumerate_pairing_types(m):
        key = (t.a, t.b)
        assert key not in seen
        seen.add(key)
        for i in range(1, len(m) + 1):
            cross = sum(x for (a, b), x in t.a if i in (a, b))
            assert 2 * t.b[i - 1] + cross == m[i - 1]
        total += pairing_count(m, t)
    # every perfect matching of sum(m) labelled points has exactly one type
    n = sum(m)
    assert total == univariate_moment(n)


def test_odd_total_has_no_types():
    assert list(enumerate_pairing_types((1, 2))) == []


def test_moment_examples(sym2, sym3):
    assert moment_wick(sym2, (1, 1)) == P("c12")
    assert moment_wick(sym2, (3, 3)) == P("9*c12 + 6*c12^3")
    assert moment_wick(sym3, (1, 1, 1)) == Polynomial.zero()
    assert moment_wick(sym3, (1, 1, 2)) == P("c12 + 2*c13*c23")


def test_bruteforce_examples(sym2):
    assert moment_bruteforce(sym2, (2, 2)) == P("1 + 2*c12^2")
    assert moment_bruteforce(sym2, (2, 0)) == Polynomial.constant(1)
    assert moment_bruteforce(sym2, (4, 2)) == P("3 + 12*c12^2")


def test_bruteforce_guard(sym2):
    with pytest.raises(SizeGuardError):
        moment_bruteforce(sym2, (7, 7))


def test_dimension_mismatch(sym3):
    with pytest.raises(DimensionError):
        moment_wick(sym3, (1, 1))


@pytest.mark.parametrize("k", [2, 3])
def test_wick_matches_bruteforce_up_to_guard(k):
    cov = CovarianceSpec.symbolic(k)
    for m in product(range(9), repeat=k):
        if sum(m) <= 12:
            assert moment_wick(cov, m) == moment_bruteforce(cov, m), m


def test_wick_matches_typewise_sum(sym3, num3):
    for m in product(range(5), repeat=3):
        assert moment_wick(sym3, m) == moment_from_types(sym3, m)
        assert moment_wick(num3, m) == moment_from_types(num3, m)


def test_mixed_symbolic_numeric_entries():
    cov = CovarianceSpec.from_mapping(3, {"c13": "1/3"})
    for m in product(range(5), repeat=3):
        if sum(m) <= 12:
            assert moment_wick(cov, m) == moment_bruteforce(cov, m)


def test_coefficients_are_nonnegative_integers(sym3):
    for m in [(5, 4, 3), (6, 6, 6), (9, 2, 7)]:
        for _, c in moment_wick(sym3, m).items():
            assert c.denominator == 1 and c > 0


@pytest.mark.parametrize("m", [(4, 3, 1), (6, 2, 4), (3, 3, 2), (1, 5, 2)])
def test_permutation_symmetry(sym3, m):
    base = moment_wick(sym3, m)
    for perm in permutations((1, 2, 3)):
        pm = tuple(m[p - 1] for p in perm)
        other = moment_wick(sym3.permuted(perm), pm)
        assert rename(other, perm) == base


def test_permuted_numeric_covariance(num3):
    m = (5, 2, 3)
    perm = (3, 1, 2)
    pm = tuple(m[p - 1] for p in perm)
    assert moment_wick(num3.permuted(perm), pm) == moment_wick(num3, m)


@given(st.lists(st.integers(0, 7), min_size=3, max_size=3))
def test_degree_and_constant_term(m):
    cov = CovarianceSpec.symbolic(3)
    p = moment_wick(cov, m)
    if sum(m) % 2:
        assert p == Polynomial.zero()
        return
    assert p.total_degree() <= sum(m) // 2
    const = mpq(1)
    for x in m:
        const *= univariate_moment(x)
    assert p.coeff(Monomial()) == const


@given(
    st.lists(st.integers(0, 7), min_size=3, max_size=3),
    st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=7), min_size=3, max_size=3),
)
def test_specialization(m, vals):
    sym = CovarianceSpec.symbolic(3)
    num = CovarianceSpec.numeric(3, vals)
    point = dict(zip([(1, 2), (1, 3), (2, 3)], vals))
    assert moment_wick(sym, m).eval(point) == moment_wick(num, m).constant_value()
