import os

import pytest
from gmpy2 import mpq
from hypothesis import settings

from mvnmoments.covariance import CovarianceSpec
from mvnmoments.exact_poly import Monomial, Polynomial

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

# keep CLI tests away from the user's cache directory
os.environ.setdefault("MVNM_NO_CACHE", "1")


@pytest.fixture
def sym2():
    return CovarianceSpec.symbolic(2)


@pytest.fixture
def sym3():
    return CovarianceSpec.symbolic(3)


@pytest.fixture
def num3():
    return CovarianceSpec.numeric(3, [mpq(1, 2), mpq(1, 3), mpq(1, 4)])


def rename(poly: Polynomial, perm) -> Polynomial:
    """Rename c_ab -> c_{perm[a] perm[b]} (perm is 1-based)."""
    terms = {}
    for mono, c in poly.items():
        exps = {}
        for (a, b), e in mono.items():
            i, j = perm[a - 1], perm[b - 1]
            key = (min(i, j), max(i, j))
            exps[key] = exps.get(key, 0) + e
        terms[Monomial(exps)] = c
    return Polynomial(terms)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
