"""Exact moments of the autocorrelation demerit factor of binary sequences."""

from .errors import CapacityError, DomainError, FitError
from .moments import (
    central_moment_via_partitions,
    closed_form_suite,
    pipeline,
    standardized_moment,
)
from .partition import Triple, TriplePartition
from .quasipoly import QuasiPolynomial, detect_period, fit
from .satcount import build_system, count_exact, count_relaxed, is_satisfiable
from .seqcore import BinarySequence, adf, autocorrelation, oracle_central_moment, ssac
from .wreath import WreathElement, canonical_form, enumerate_con_reps, orbit_of

__all__ = [
    "BinarySequence",
    "CapacityError",
    "DomainError",
    "FitError",
    "QuasiPolynomial",
    "Triple",
    "TriplePartition",
    "WreathElement",
    "adf",
    "autocorrelation",
    "build_system",
    "canonical_form",
    "central_moment_via_partitions",
    "closed_form_suite",
    "count_exact",
    "count_relaxed",
    "detect_period",
    "enumerate_con_reps",
    "fit",
    "is_satisfiable",
    "oracle_central_moment",
    "orbit_of",
    "pipeline",
    "ssac",
    "standardized_moment",
]
