"""Exact rationals and sparse multivariate polynomials in the correlation symbols.

Variables are identified by 1-based index pairs ``(i, j)`` with ``i < j`` and
print as ``c12``, ``c13``, ... (``c1_10`` once an index has two digits).
Canonical text order is lexicographic, descending, with ``c12`` the most
significant variable, e.g. ``6*c12^3 + 9*c12`` and ``c12 + 2*c13*c23``.
"""
from __future__ import annotations

import json
import re
from typing import Dict, Iterable, Mapping, Tuple, Union

import gmpy2
from gmpy2 import mpq, mpz

ExactRational = type(mpq(0))
Var = Tuple[int, int]
Number = Union[int, "ExactRational"]

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def rational(x) -> ExactRational:
    """Coerce ints, strings ``"p/q"``, Fractions and mpq to an exact rational."""
    if isinstance(x, ExactRational):
        return x
    if isinstance(x, str):
        s = x.strip()
        if not _RATIONAL_RE.match(s):
            raise ValueError(f"not an exact rational: {x!r}")
        num, _, den = s.partition("/")
        if den and int(den) == 0:
            raise ZeroDivisionError(f"zero denominator in {x!r}")
        return mpq(int(num), int(den) if den else 1)
    if isinstance(x, float):
        raise TypeError("floating-point input is not accepted; use p/q")
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return mpq(int(x.numerator), int(x.denominator))
    return mpq(x)


def format_rational(x) -> str:
    return str(rational(x))


def var_name(v: Var) -> str:
    i, j = v
    if i < 10 and j < 10:
        return f"c{i}{j}"
    return f"c{i}_{j}"


def parse_var(name: str) -> Var:
    m = re.fullmatch(r"c(\d+)_(\d+)|c(\d)(\d)", name.strip())
    if not m:
        raise ValueError(f"bad variable name {name!r}")
    i, j = (m.group(1), m.group(2)) if m.group(1) else (m.group(3), m.group(4))
    i, j = int(i), int(j)
    if not 1 <= i < j:
        raise ValueError(f"variable {name!r} must have 1 <= i < j")
    return (i, j)


class Monomial:
    """Product of correlation symbols, stored sparsely (no zero exponents)."""

    __slots__ = ("_exps", "_hash")

    def __init__(self, exps: Union[Mapping[Var, int], Iterable[Tuple[Var, int]], None] = None):
        items = exps.items() if isinstance(exps, Mapping) else (exps or ())
        clean = {}
        for v, e in items:
            v = (int(v[0]), int(v[1]))
            if not 1 <= v[0] < v[1]:
                raise ValueError(f"variable {v} must satisfy 1 <= i < j")
            if e < 0:
                raise ValueError("negative exponent")
            if e:
                clean[v] = clean.get(v, 0) + int(e)
        self._exps = tuple(sorted(clean.items()))
        self._hash = hash(self._exps)

    @classmethod
    def one(cls) -> "Monomial":
        return cls()

    @property
    def exponents(self) -> Dict[Var, int]:
        return dict(self._exps)

    def items(self) -> Tuple[Tuple[Var, int], ...]:
        return self._exps

    def variables(self) -> Tuple[Var, ...]:
        return tuple(v for v, _ in self._exps)

    def degree(self) -> int:
        return sum(e for _, e in self._exps)

    def exponent(self, v: Var) -> int:
        for w, e in self._exps:
            if w == v:
                return e
        return 0

    def __mul__(self, other: "Monomial") -> "Monomial":
        d = dict(self._exps)
        for v, e in other._exps:
            d[v] = d.get(v, 0) + e
        return Monomial(d)

    def divides(self, other: "Monomial") -> bool:
        return all(other.exponent(v) >= e for v, e in self._exps)

    def __truediv__(self, other: "Monomial") -> "Monomial":
        d = dict(self._exps)
        for v, e in other._exps:
            left = d.get(v, 0) - e
            if left < 0:
                raise ValueError(f"{other} does not divide {self}")
            d[v] = left
        return Monomial(d)

    def __eq__(self, other) -> bool:
        return isinstance(other, Monomial) and self._exps == other._exps

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Monomial({self})"

    def __str__(self) -> str:
        if not self._exps:
            return "1"
        return "*".join(var_name(v) + (f"^{e}" if e > 1 else "") for v, e in self._exps)


def _order_key(variables):
    def key(mono: Monomial):
        return tuple(mono.exponent(v) for v in variables)
    return key


class Polynomial:
    """Immutable sparse polynomial over exact rationals in the ``c_ij`` symbols."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Union[Mapping[Monomial, Number], None] = None):
        clean: Dict[Monomial, ExactRational] = {}
        for mono, c in (terms or {}).items():
            if not isinstance(mono, Monomial):
                mono = Monomial(mono)
            c = rational(c)
            if c:
                clean[mono] = clean.get(mono, mpq(0)) + c
                if not clean[mono]:
                    del clean[mono]
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, ExactRational]) -> "Polynomial":
        # trusted constructor: keys are Monomials, values nonzero mpq
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def constant(cls, c: Number) -> "Polynomial":
        c = rational(c)
        return cls._raw({Monomial.one(): c} if c else {})

    @classmethod
    def var(cls, i: int, j: int) -> "Polynomial":
        return cls._raw({Monomial({(i, j): 1}): mpq(1)})

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls._raw({})

    @property
    def terms(self) -> Dict[Monomial, ExactRational]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m.items() for m in self._terms)

    def constant_value(self) -> ExactRational:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._terms.get(Monomial.one(), mpq(0))

    def variables(self) -> Tuple[Var, ...]:
        seen = set()
        for m in self._terms:
            seen.update(m.variables())
        return tuple(sorted(seen))

    def total_degree(self) -> int:
        return max((m.degree() for m in self._terms), default=0)

    def coeff(self, mono: Union[Monomial, Mapping[Var, int]]) -> ExactRational:
        if not isinstance(mono, Monomial):
            mono = Monomial(mono)
        return self._terms.get(mono, mpq(0))

    def sorted_terms(self):
        key = _order_key(self.variables())
        return sorted(self._terms.items(), key=lambda t: key(t[0]), reverse=True)

    # arithmetic
    @staticmethod
    def _coerce(other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(other)

    def __add__(self, other) -> "Polynomial":
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        if len(other._terms) > len(self._terms):
            big, small = other._terms, self._terms
        else:
            big, small = self._terms, other._terms
        out = dict(big)
        for m, c in small.items():
            s = out.get(m)
            s = c if s is None else s + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def scale(self, c: Number) -> "Polynomial":
        c = rational(c)
        if not c:
            return Polynomial.zero()
        return Polynomial._raw({m: v * c for m, v in self._terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            try:
                return self.scale(other)
            except (TypeError, ValueError):
                return NotImplemented
        out: Dict[Monomial, ExactRational] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 * m2
                s = out.get(m)
                out[m] = c1 * c2 if s is None else s + c1 * c2
        return Polynomial._raw({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Polynomial":
        if e < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def leading_term(self) -> Tuple[Monomial, ExactRational]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        return self.sorted_terms()[0]

    def exact_div(self, other: Union["Polynomial", Number]) -> "Polynomial":
        """Quotient ``self / other``; raises ``ValueError`` unless the division is exact."""
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if other.is_constant():
            return self.scale(1 / other.constant_value())
        variables = tuple(sorted(set(self.variables()) | set(other.variables())))
        key = _order_key(variables)
        lead_m, lead_c = max(other._terms.items(), key=lambda t: key(t[0]))
        rem = dict(self._terms)
        quot: Dict[Monomial, ExactRational] = {}
        while rem:
            m, c = max(rem.items(), key=lambda t: key(t[0]))
            if not lead_m.divides(m):
                raise ValueError("polynomial division is not exact")
            qm, qc = m / lead_m, c / lead_c
            quot[qm] = qc
            for om, oc in other._terms.items():
                pm = qm * om
                s = rem.get(pm, mpq(0)) - qc * oc
                if s:
                    rem[pm] = s
                else:
                    rem.pop(pm, None)
        return Polynomial._raw(quot)

    def content(self) -> ExactRational:
        """Positive rational ``g`` such that ``self / g`` has coprime integer coefficients."""
        if not self._terms:
            return mpq(1)
        num = mpz(0)
        den = mpz(1)
        for c in self._terms.values():
            num = gmpy2.gcd(num, c.numerator)
            den = gmpy2.lcm(den, c.denominator)
        return mpq(num, den)

    def monomial_content(self) -> Monomial:
        if not self._terms:
            return Monomial.one()
        monos = list(self._terms)
        common = dict(monos[0].items())
        for m in monos[1:]:
            common = {v: min(e, m.exponent(v)) for v, e in common.items() if m.exponent(v)}
        return Monomial(common)

    def divide_monomial(self, mono: Monomial) -> "Polynomial":
        return Polynomial._raw({m / mono: c for m, c in self._terms.items()})

    def eval(self, assignment: Mapping) -> ExactRational:
        """Substitute exact values for every variable; the result is a rational."""
        values = {}
        for k, v in assignment.items():
            values[parse_var(k) if isinstance(k, str) else tuple(k)] = rational(v)
        missing = [var_name(v) for v in self.variables() if v not in values]
        if missing:
            raise KeyError(f"no value assigned to {', '.join(missing)}")
        total = mpq(0)
        for m, c in self._terms.items():
            t = c
            for v, e in m.items():
                t *= values[v] ** e
            total += t
        return total

    def substitute(self, assignment: Mapping) -> "Polynomial":
        """Partial evaluation: replace the assigned variables, keep the rest."""
        values = {}
        for k, v in assignment.items():
            values[parse_var(k) if isinstance(k, str) else tuple(k)] = rational(v)
        out: Dict[Monomial, ExactRational] = {}
        for m, c in self._terms.items():
            keep = {}
            for v, e in m.items():
                if v in values:
                    c = c * values[v] ** e
                else:
                    keep[v] = e
            if c:
                km = Monomial(keep)
                out[km] = out.get(km, mpq(0)) + c
        return Polynomial({m: c for m, c in out.items() if c})

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self._terms == other._terms
        try:
            return self._terms == Polynomial.constant(other)._terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial('{self}')"

    def __str__(self) -> str:
        return to_text(self)

    def to_json(self) -> list:
        return to_json(self)


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def coeff(p: Polynomial, mono) -> ExactRational:
    return p.coeff(mono)


def eval_poly(p: Polynomial, assignment: Mapping) -> ExactRational:
    return p.eval(assignment)


def to_text(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for i, (mono, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        if not mono.items():
            body = str(a)
        elif a == 1:
            body = str(mono)
        else:
            body = f"{a}*{mono}"
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


_TERM_RE = re.compile(r"\s*([+-])?\s*([^+\-\s][^+-]*?)\s*(?=[+-]|$)")
_FACTOR_RE = re.compile(r"^(c\d+(?:_\d+)?)(?:\^(\d+))?$")


def parse_polynomial(text: str) -> Polynomial:
    """Inverse of :func:`to_text` (also accepts any term order and spacing)."""
    s = text.strip()
    if not s:
        raise ValueError("empty polynomial text")
    terms: Dict[Monomial, ExactRational] = {}
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial {text!r} at {pos}")
        sign, body = m.group(1), m.group(2)
        if sign is None and not first:
            raise ValueError(f"missing operator in {text!r}")
        first = False
        pos = m.end()
        c = mpq(1)
        exps: Dict[Var, int] = {}
        for factor in body.split("*"):
            factor = factor.strip()
            fm = _FACTOR_RE.match(factor)
            if fm:
                v = parse_var(fm.group(1))
                exps[v] = exps.get(v, 0) + int(fm.group(2) or 1)
            else:
                c *= rational(factor)
        if sign == "-":
            c = -c
        mono = Monomial(exps)
        terms[mono] = terms.get(mono, mpq(0)) + c
    return Polynomial(terms)


def to_json(p: Polynomial) -> list:
    return [
        {"coeff": str(c), "exps": {var_name(v): e for v, e in mono.items()}}
        for mono, c in p.sorted_terms()
    ]


def from_json(data: Union[str, list]) -> Polynomial:
    if isinstance(data, str):
        data = json.loads(data)
    terms: Dict[Monomial, ExactRational] = {}
    for term in data:
        mono = Monomial({parse_var(k): int(e) for k, e in term["exps"].items()})
        terms[mono] = terms.get(mono, mpq(0)) + rational(term["coeff"])
    return Polynomial(terms)

