"""Unit-diagonal covariance matrices with symbolic or exact-rational correlations."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import gmpy2
from gmpy2 import mpq

from .exact_poly import ExactRational, Polynomial, Var, format_rational, parse_var, rational, var_name

SYMBOLIC = "symbolic"


class DimensionError(ValueError):
    """Multi-index length does not match the covariance dimension."""


@dataclass(frozen=True)
class CovarianceSpec:
    """Correlation entries for pairs ``i < j`` (1-based); the diagonal is 1.

    Each entry is either the string ``"symbolic"`` (the entry is the symbol
    ``c_ij``) or an exact rational.  Positive-definiteness is not checked.
    """

    k: int
    entries: Tuple[Tuple[Var, object], ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        expected = list(combinations(range(1, self.k + 1), 2))
        got = [v for v, _ in self.entries]
        if got != expected:
            raise ValueError(f"entries must cover pairs {expected} in order")
        for v, e in self.entries:
            if e != SYMBOLIC and not isinstance(e, type(mpq(0))):
                raise TypeError(f"entry {v} must be 'symbolic' or an exact rational")

    @classmethod
    def symbolic(cls, k: int) -> "CovarianceSpec":
        return cls(k, tuple((v, SYMBOLIC) for v in combinations(range(1, k + 1), 2)))

    @classmethod
    def numeric(cls, k: int, values: Sequence) -> "CovarianceSpec":
        """``values`` lists the correlations for pairs in lex order (c12, c13, ..., c23, ...)."""
        pairs = list(combinations(range(1, k + 1), 2))
        if len(values) != len(pairs):
            raise ValueError(f"k={k} needs {len(pairs)} correlations, got {len(values)}")
        return cls(k, tuple((v, rational(x)) for v, x in zip(pairs, values)))

    @classmethod
    def from_mapping(cls, k: int, entries: Mapping) -> "CovarianceSpec":
        """Build from ``{(i, j) or 'cij': value}``; missing pairs are symbolic."""
        norm = {}
        for key, val in entries.items():
            v = parse_var(key) if isinstance(key, str) else (int(key[0]), int(key[1]))
            norm[v] = val
        out = []
        for v in combinations(range(1, k + 1), 2):
            val = norm.pop(v, SYMBOLIC)
            out.append((v, SYMBOLIC if val == SYMBOLIC else rational(val)))
        if norm:
            raise ValueError(f"pairs {sorted(norm)} are outside k={k}")
        return cls(k, tuple(out))

    def entry(self, i: int, j: int):
        """Entry ``(i, j)`` with 1-based indices; diagonal entries are 1."""
        if i == j:
            return mpq(1)
        a, b = min(i, j), max(i, j)
        return dict(self.entries)[(a, b)]

    def pairs(self) -> Tuple[Var, ...]:
        return tuple(v for v, _ in self.entries)

    def symbolic_pairs(self) -> Tuple[Var, ...]:
        return tuple(v for v, e in self.entries if e == SYMBOLIC)

    def numeric_pairs(self) -> Dict[Var, ExactRational]:
        return {v: e for v, e in self.entries if e != SYMBOLIC}

    @property
    def is_numeric(self) -> bool:
        return not self.symbolic_pairs()

    def as_polynomial(self, i: int, j: int) -> Polynomial:
        e = self.entry(i, j)
        if e == SYMBOLIC:
            return Polynomial.var(min(i, j), max(i, j))
        return Polynomial.constant(e)

    def assignment(self) -> Dict[Var, ExactRational]:
        return self.numeric_pairs()

    def permuted(self, perm: Sequence[int]) -> "CovarianceSpec":
        """Covariance of ``(x_perm[0], x_perm[1], ...)``; ``perm`` is 1-based.

        Symbolic entries are renamed to their new positions.
        """
        out = {}
        for a, b in combinations(range(1, self.k + 1), 2):
            out[(a, b)] = self.entry(perm[a - 1], perm[b - 1])
        return CovarianceSpec.from_mapping(self.k, out)

    def common_denominator(self) -> int:
        den = gmpy2.mpz(1)
        for v in self.numeric_pairs().values():
            den = gmpy2.lcm(den, v.denominator)
        return int(den)

    def fingerprint(self) -> str:
        return ",".join(
            f"{var_name(v)}={'symbolic' if e == SYMBOLIC else format_rational(e)}" for v, e in self.entries
        ) or "k1"

    def to_json(self) -> dict:
        return {var_name(v): (SYMBOLIC if e == SYMBOLIC else format_rational(e)) for v, e in self.entries}

    @classmethod
    def from_json(cls, k: int, data: Mapping) -> "CovarianceSpec":
        return cls.from_mapping(k, dict(data))

    def __str__(self) -> str:
        return f"CovarianceSpec(k={self.k}, {self.fingerprint()})"


def check_index(cov: CovarianceSpec, m: Iterable[int]) -> Tuple[int, ...]:
    m = tuple(int(x) for x in m)
    if len(m) != cov.k:
        raise DimensionError(f"multi-index {m} has length {len(m)}, covariance has k={cov.k}")
    if any(x < 0 for x in m):
        raise ValueError(f"multi-index {m} has a negative entry")
    return m


def parse_covariance(k: int, text: str) -> CovarianceSpec:
    """``"symbolic"`` or a comma list of ``p/q`` values for pairs in lex order."""
    text = text.strip()
    if text == SYMBOLIC:
        return CovarianceSpec.symbolic(k)
    if k == 1 and text in ("", "none"):
        return CovarianceSpec.symbolic(1)
    parts = [p.strip() for p in text.split(",")]
    vals = [SYMBOLIC if p == SYMBOLIC else rational(p) for p in parts]
    pairs = list(combinations(range(1, k + 1), 2))
    if len(vals) != len(pairs):
        raise ValueError(f"k={k} needs {len(pairs)} correlations, got {len(vals)}")
    return CovarianceSpec(k, tuple(zip(pairs, vals)))
