import random
import threading
from itertools import product

import pytest
from gmpy2 import mpq

from mvnmoments.covariance import CovarianceSpec
from mvnmoments.exact_poly import Polynomial, parse_polynomial
from mvnmoments.pure import (
    NotFound,
    RecurrenceCache,
    SearchLimits,
    discover,
    moment_pure,
    pure_moment,
)
from mvnmoments.recurrence import EvalStats, Recurrence, verify
from mvnmoments.stein import moment_stein
from mvnmoments.wick import moment_wick, univariate_moment

P = parse_polynomial
HALF = CovarianceSpec.numeric(2, [mpq(1, 2)])


def test_discover_double_factorial():
    rec = discover(HALF, 1, (0,))
    assert (rec.order, rec.step, rec.offset) == (1, 2, 0)
    # proportional to M(n) - (n - 1) M(n - 2)
    lead, tail = rec.coeffs
    assert lead[1] == 0 and tail[0] == -tail[1] and lead[0] == tail[0]
    assert verify(rec, univariate_moment, 16, start=2)


def test_discover_k2_symbolic(sym2):
    rec = discover(sym2, 1, (2,))
    assert rec.order <= 2 and rec.step == 2
    oracle = lambda n: moment_wick(sym2, (n, 2))
    assert verify(rec, oracle, 16)
    assert verify(rec, oracle, 16, start=rec.first_relation)
    assert not verify(rec.perturbed(0, 0, 1), oracle, 16)


def test_discover_k3_numeric(num3):
    rec = discover(num3, 3, (4, 4))
    assert verify(rec, lambda n: moment_wick(num3, (4, 4, n)), 16)


def test_offset_follows_parity(num3):
    rec = discover(num3, 1, (3, 2))
    assert rec.offset == 1
    assert verify(rec, lambda n: moment_wick(num3, (n, 3, 2)), 16)


def test_not_found_reports_largest_tried():
    with pytest.raises(NotFound) as err:
        discover(HALF, 1, (30,), SearchLimits(max_order=1, max_degree=2))
    assert err.value.tried is not None
    assert max(err.value.tried) <= 2


def test_search_limits_validation():
    with pytest.raises(ValueError):
        SearchLimits(max_order=0)
    order = SearchLimits(max_order=2, max_degree=2).candidates()
    assert order == sorted(order, key=lambda od: (od[0] + od[1], od[0]))


def test_pure_examples(sym2, num3):
    assert moment_pure(sym2, (3, 3)) == P("9*c12 + 6*c12^3")
    assert moment_pure(num3, (40, 12, 9)) == moment_wick(num3, (40, 12, 9))


def test_parity_skips_discovery(sym3):
    cache = RecurrenceCache()
    assert moment_pure(sym3, (1, 1, 1), cache=cache) == Polynomial.zero()
    assert cache.misses == 0


def test_k3_symbolic_uses_fallback(sym3):
    res = pure_moment(sym3, (4, 3, 3))
    assert res.fallback_used and res.engine == "stein"
    assert res.metadata()["fallback_used"] is True
    assert res.value == moment_wick(sym3, (4, 3, 3))
    with pytest.raises(NotFound):
        pure_moment(sym3, (4, 3, 3), fallback=None)


@pytest.mark.parametrize("k", [2, 3])
def test_cross_engine_grid(k):
    cov = CovarianceSpec.symbolic(k)
    cache = RecurrenceCache()
    for m in product(range(9), repeat=k):
        w = moment_wick(cov, m)
        assert moment_pure(cov, m, cache=cache) == w
        assert moment_stein(cov, m) == w


def test_random_numeric_instances():
    rng = random.Random(2024)
    cache = RecurrenceCache()
    for _ in range(50):
        k = rng.choice((2, 3))
        vals = [mpq(rng.randint(-4, 4), rng.randint(1, 5)) for _ in range(k * (k - 1) // 2)]
        cov = CovarianceSpec.numeric(k, vals)
        m = tuple(rng.randint(0, 40) for _ in range(k))
        assert moment_pure(cov, m, cache=cache) == moment_wick(cov, m), (vals, m)


def test_zero_correlation_is_handled():
    cov = CovarianceSpec.numeric(3, [0, mpq(1, 2), 0])
    for m in [(20, 3, 5), (6, 8, 30)]:
        assert moment_pure(cov, m, cache=RecurrenceCache()) == moment_wick(cov, m)


def test_constant_space_counter(sym2):
    stats = EvalStats()
    res = pure_moment(sym2, (300, 4), stats=stats, cache=RecurrenceCache())
    assert stats.max_live <= res.recurrence.order
    assert stats.steps > 100


def test_bridge_singular_leading_coefficient():
    # (n - 4) * (M(n) - (n - 1) M(n - 2)) = 0 along m2 = 0: the lead vanishes at n = 4
    cov = CovarianceSpec.numeric(2, [mpq(1, 2)])
    one = mpq(1)
    rec = Recurrence(2, 1, 2, 1, 0, (0,), cov, ((mpq(-4), one, mpq(0)), (mpq(-4), mpq(5), -one)), 0)
    cache = RecurrenceCache()
    cache.put(cache.key(cov, 1, (0,)), rec)
    stats = EvalStats()
    res = pure_moment(cov, (12, 0), cache=cache, stats=stats)
    assert res.value == univariate_moment(12)
    assert stats.bridged == [4]


def test_cache_persists_and_is_shared(tmp_path, num3):
    cache = RecurrenceCache(tmp_path)
    a = moment_pure(num3, (30, 4, 6), cache=cache)
    assert cache.misses == 1 and len(list(tmp_path.glob("*.json"))) == 1
    fresh = RecurrenceCache(tmp_path)
    assert moment_pure(num3, (32, 4, 6), cache=fresh) == moment_wick(num3, (32, 4, 6))
    assert fresh.hits == 1 and fresh.misses == 0
    assert a == moment_wick(num3, (30, 4, 6))


def test_cache_concurrent_get_or_discover(tmp_path, num3):
    cache = RecurrenceCache(tmp_path)
    results = []

    def work():
        results.append(cache.get_or_discover(num3, 1, (3, 3), SearchLimits()))

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(results) == 4 and all(r == results[0] for r in results)
    assert len(list(tmp_path.glob("*.json"))) == 1
    assert not list(tmp_path.glob("*.tmp"))


def test_duplicate_discovery_is_canonical(num3):
    a = discover(num3, 2, (5, 1))
    b = discover(num3, 2, (5, 1))
    assert a == b and a.dumps() == b.dumps()
