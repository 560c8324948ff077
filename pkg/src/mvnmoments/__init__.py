"""Exact mixed moments of the multivariate normal distribution."""
from .covariance import SYMBOLIC, CovarianceSpec, DimensionError, parse_covariance
from .exact_poly import Monomial, Polynomial, parse_polynomial, rational, to_text
from .linalg import modular_nullspace, nullspace
from .marriage import count_marriages, marriage_polynomial
from .pure import NotFound, RecurrenceCache, SearchLimits, discover, moment_pure, pure_moment
from .recurrence import EvalStats, Recurrence, SingularLeadingCoefficient, evaluate, verify
from .stein import SteinContext, moment_stein, seed_sequence
from .wick import (
    PairingType,
    SizeGuardError,
    enumerate_pairing_types,
    moment_bruteforce,
    moment_wick,
    univariate_moment,
)

__all__ = [
    "SYMBOLIC", "CovarianceSpec", "DimensionError", "parse_covariance",
    "Monomial", "Polynomial", "parse_polynomial", "rational", "to_text",
    "modular_nullspace", "nullspace",
    "count_marriages", "marriage_polynomial",
    "NotFound", "RecurrenceCache", "SearchLimits", "discover", "moment_pure", "pure_moment",
    "EvalStats", "Recurrence", "SingularLeadingCoefficient", "evaluate", "verify",
    "SteinContext", "moment_stein", "seed_sequence",
    "PairingType", "SizeGuardError", "enumerate_pairing_types", "moment_bruteforce", "moment_wick",
    "univariate_moment",
]
