"""Pure single-direction recurrences with polynomial coefficients.

A :class:`Recurrence` asserts

    sum_{t=0..order} coeffs[t](n) * M(n - t*step) = 0

for every ``n >= offset + order*step`` on the sublattice ``n = offset (mod step)``,
where ``coeffs[t](n) = sum_e coeffs[t][e] * n**e``.  Coefficient entries are
exact rationals (numeric covariance) or polynomials in the ``c_ij``.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import gmpy2
from gmpy2 import mpq, mpz

from .covariance import CovarianceSpec
from .exact_poly import Polynomial, parse_polynomial, rational
from .linalg import normalize_vector


class SingularLeadingCoefficient(ArithmeticError):
    """The leading coefficient vanishes at index ``n``; the value there must come from elsewhere."""

    def __init__(self, n: int):
        super().__init__(f"leading coefficient vanishes at n={n}")
        self.n = n


@dataclass(frozen=True)
class Recurrence:
    k: int
    direction: int  # 1-based coordinate the recurrence runs along
    step: int
    order: int
    offset: int
    fixed: Tuple[int, ...]
    cov: CovarianceSpec
    coeffs: Tuple[Tuple[object, ...], ...]
    fit_points: int = 0  # relation indices used for fitting

    def __post_init__(self):
        if len(self.coeffs) != self.order + 1:
            raise ValueError("coeffs must have order + 1 entries")
        if not any(self.coeffs[0]):
            raise ValueError("leading coefficient is the zero polynomial")
        if len(self.fixed) != self.k - 1:
            raise ValueError("fixed must list the other k - 1 coordinates")

    @property
    def symbolic(self) -> bool:
        return not self.cov.is_numeric

    @property
    def degree(self) -> int:
        return max(_poly_degree(c) for c in self.coeffs)

    @property
    def first_relation(self) -> int:
        return self.offset + self.order * self.step

    @property
    def fit_end(self) -> int:
        """First relation index not used for fitting."""
        return self.first_relation + self.fit_points * self.step

    def point(self, n: int) -> Tuple[int, ...]:
        d = self.direction - 1
        return self.fixed[:d] + (n,) + self.fixed[d:]

    def coefficient_at(self, t: int, n: int):
        acc = None
        for c in reversed(self.coeffs[t]):
            acc = c if acc is None else acc * n + c
        return acc if acc is not None else mpq(0)

    def residual(self, values: Callable[[int], object], n: int):
        total = None
        for t in range(self.order + 1):
            c = self.coefficient_at(t, n)
            if not c:
                continue
            term = c * self.field(values(n - t * self.step))
            total = term if total is None else total + term
        return total if total is not None else mpq(0)

    def field(self, x):
        """Coerce a moment value into this recurrence's coefficient field."""
        if self.symbolic:
            return x if isinstance(x, Polynomial) else Polynomial.constant(x)
        return x.constant_value() if isinstance(x, Polynomial) else rational(x)

    def scaled(self, factor) -> "Recurrence":
        return Recurrence(
            self.k, self.direction, self.step, self.order, self.offset, self.fixed, self.cov,
            tuple(tuple(c * factor for c in row) for row in self.coeffs), self.fit_points,
        )

    def perturbed(self, t: int = 0, e: int = 0, delta=1) -> "Recurrence":
        """Copy with ``delta`` added to one coefficient entry."""
        rows = [list(row) for row in self.coeffs]
        rows[t][e] = rows[t][e] + delta
        return Recurrence(
            self.k, self.direction, self.step, self.order, self.offset, self.fixed, self.cov,
            tuple(tuple(r) for r in rows), self.fit_points,
        )

    def canonical(self) -> "Recurrence":
        """Scale so the coefficients are coprime integers (integer polynomials
        in the symbolic case) with a positive leading entry."""
        flat = [c for row in self.coeffs for c in row]
        if self.symbolic:
            polys = normalize_vector([c if isinstance(c, Polynomial) else Polynomial.constant(c) for c in flat])
            lead = next(p for p in reversed(polys[: len(self.coeffs[0])]) if p)
            if lead.leading_term()[1] < 0:
                polys = [-p for p in polys]
            flat = polys
        else:
            num, den = mpz(0), mpz(1)
            for c in flat:
                num = gmpy2.gcd(num, c.numerator)
                den = gmpy2.lcm(den, c.denominator)
            g = mpq(num, den)
            lead = next(c for c in reversed(flat[: len(self.coeffs[0])]) if c)
            if lead < 0:
                g = -g
            flat = [c / g for c in flat]
        rows, pos = [], 0
        for row in self.coeffs:
            rows.append(tuple(flat[pos: pos + len(row)]))
            pos += len(row)
        return Recurrence(
            self.k, self.direction, self.step, self.order, self.offset, self.fixed, self.cov,
            tuple(rows), self.fit_points,
        )

    def summary(self) -> str:
        return (
            f"order {self.order}, degree {self.degree}, step {self.step}, direction {self.direction}, "
            f"offset {self.offset}, fixed {list(self.fixed)}"
        )

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "direction": self.direction,
            "step": self.step,
            "order": self.order,
            "offset": self.offset,
            "fixed": list(self.fixed),
            "covariance": self.cov.to_json(),
            "coeffs": [[str(c) for c in row] for row in self.coeffs],
            "fit_points": self.fit_points,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, data) -> "Recurrence":
        if isinstance(data, str):
            data = json.loads(data)
        k = int(data["k"])
        cov = CovarianceSpec.from_json(k, data["covariance"])
        parse = rational if cov.is_numeric else parse_polynomial
        return cls(
            k=k,
            direction=int(data["direction"]),
            step=int(data["step"]),
            order=int(data["order"]),
            offset=int(data["offset"]),
            fixed=tuple(int(x) for x in data["fixed"]),
            cov=cov,
            coeffs=tuple(tuple(parse(c) for c in row) for row in data["coeffs"]),
            fit_points=int(data.get("fit_points", 0)),
        )


def _poly_degree(row: Sequence[object]) -> int:
    for e in range(len(row) - 1, -1, -1):
        if row[e]:
            return e
    return 0


def verify(rec: Recurrence, oracle: Callable[[int], object], points: int, start: Optional[int] = None) -> bool:
    """True iff the relation holds exactly at ``points`` consecutive indices
    beginning at ``start`` (default: just past the fitting window)."""
    if points < 1:
        raise ValueError("points must be at least 1")
    n0 = rec.fit_end if start is None else start
    if n0 < rec.first_relation:
        raise ValueError(f"relation is only asserted from n={rec.first_relation}")
    if (n0 - rec.offset) % rec.step:
        raise ValueError("start index is off the recurrence sublattice")
    cache = {}

    def values(n):
        if n not in cache:
            cache[n] = oracle(n)
        return cache[n]

    for i in range(points):
        if rec.residual(values, n0 + i * rec.step):
            return False
    return True


@dataclass
class EvalStats:
    steps: int = 0
    max_live: int = 0  # largest number of window values held at once
    bridged: List[int] = field(default_factory=list)


def evaluate(
    rec: Recurrence,
    seeds: Sequence[Tuple[int, object]],
    target: int,
    bridge: Optional[Callable[[int], object]] = None,
    stats: Optional[EvalStats] = None,
):
    """Slide an ``order``-value window from the seeds up to ``target``.

    ``seeds`` are ``(index, value)`` for ``order`` consecutive sublattice
    indices.  When the leading coefficient vanishes at some ``n`` the value
    there is taken from ``bridge(n)``; without a bridge
    :class:`SingularLeadingCoefficient` is raised.
    """
    step, order = rec.step, rec.order
    if len(seeds) != order:
        raise ValueError(f"need exactly {order} seeds, got {len(seeds)}")
    idx = [i for i, _ in seeds]
    if any(b - a != step for a, b in zip(idx, idx[1:])):
        raise ValueError("seed indices must be consecutive on the sublattice")
    if (target - idx[0]) % step or target < idx[0]:
        raise ValueError(f"target {target} is not on the seeds' sublattice at or above {idx[0]}")
    if target <= idx[-1]:
        return rec.field(seeds[(target - idx[0]) // step][1])
    n = idx[-1] + step
    if n < rec.first_relation:
        raise ValueError(f"relation is only asserted from n={rec.first_relation}")
    stats = stats if stats is not None else EvalStats()
    window = deque((rec.field(v) for _, v in seeds), maxlen=order)
    stats.max_live = max(stats.max_live, len(window))
    symbolic = rec.symbolic
    while True:
        lead = rec.coefficient_at(0, n)
        if not lead:
            if bridge is None:
                raise SingularLeadingCoefficient(n)
            value = rec.field(bridge(n))
            stats.bridged.append(n)
        else:
            acc = None
            for t in range(1, order + 1):
                c = rec.coefficient_at(t, n)
                if c:
                    term = c * window[-t]
                    acc = term if acc is None else acc + term
            if acc is None:
                value = rec.field(0)
            elif symbolic:
                value = (-acc).exact_div(lead)
            else:
                value = -acc / lead
        window.append(value)
        stats.steps += 1
        stats.max_live = max(stats.max_live, len(window))
        if n == target:
            return value
        n += step
