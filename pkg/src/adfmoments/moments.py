"""Central moments of ssac from contributory partitions, and the checks built on them.

The p-th central moment of ssac equals the number of pairs (P, U) where P is a
contributory partition of [p] x [2] x [2] and U an injective solution in [l]
of its linear system.  Summing over isomorphism classes, each class contributes
``orbit_size * count_exact(rep, l)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .errors import CapacityError, DomainError
from .quasipoly import DEFAULT_PERIODS, QuasiPolynomial, detect_period, fit
from .satcount import component_extrapolation, exact_counts
from .seqcore import StandardizedMoment, format_fraction, oracle_central_moment
from .wreath import OrbitClass, enumerate_con_reps

PIPELINE_P_CAP = 4


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@lru_cache(maxsize=None)
def con_classes(p: int) -> tuple[OrbitClass, ...]:
    if p > PIPELINE_P_CAP:
        raise CapacityError(f"p={p} exceeds the pipeline cap {PIPELINE_P_CAP}")
    return tuple(enumerate_con_reps(p))


@dataclass
class MomentPipelineResult:
    p: int
    lengths: list[int]
    classes: list[OrbitClass]
    sols: list[list[int]]
    central_ssac: dict[int, int] = field(default_factory=dict)
    fitted: QuasiPolynomial | None = None

    def central_adf(self, ell: int) -> Fraction:
        return Fraction(self.central_ssac[ell], ell ** (2 * self.p))

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "classes": [
                {
                    "representative": str(c.representative),
                    "orbit_size": c.orbit_size,
                    "sols": dict(zip(map(str, self.lengths), s)),
                }
                for c, s in zip(self.classes, self.sols)
            ],
            "central_ssac": {str(l): str(v) for l, v in self.central_ssac.items()},
            "central_adf": {str(l): format_fraction(self.central_adf(l)) for l in self.lengths if l > 0},
            "fitted": None if self.fitted is None else self.fitted.to_json(),
        }


def pipeline(p: int, lengths: Iterable[int]) -> MomentPipelineResult:
    """Per-class solution counts and the summed central moments of ssac."""
    lengths = sorted(set(lengths))
    if any(l < 0 for l in lengths):
        raise DomainError("lengths must be nonnegative")
    if p == 0:
        return MomentPipelineResult(0, lengths, [], [], {l: 1 for l in lengths})
    classes = list(con_classes(p))
    sols = [exact_counts(c.representative, lengths) for c in classes]
    totals = {
        l: sum(c.orbit_size * s[i] for c, s in zip(classes, sols)) for i, l in enumerate(lengths)
    }
    return MomentPipelineResult(p, lengths, classes, sols, totals)


def central_moment_via_partitions(p: int, ell: int) -> int:
    if ell < 1:
        raise DomainError("length must be at least 1")
    return pipeline(p, [ell]).central_ssac[ell]


def central_moments_via_partitions(p: int, lengths: Iterable[int]) -> dict[int, int]:
    return pipeline(p, lengths).central_ssac


EXTRAPOLATION_CHUNK = 24


def default_degree(p: int) -> int:
    return 3 * p // 2


def fit_lengths(period: int, degree: int) -> list[int]:
    return list(range(1, period * (degree + 2) + 1))


def fitted_moment(
    p: int,
    degree: int | None = None,
    candidates: Sequence[int] = DEFAULT_PERIODS,
    lengths: Sequence[int] | None = None,
    extrapolate: bool = False,
) -> QuasiPolynomial:
    """Quasi-polynomial in l for the p-th central moment of ssac, from pipeline values.

    With ``extrapolate`` the long lengths use per-component quasi-polynomials,
    which is what makes periods like 12 reachable for p=4.
    """
    degree = default_degree(p) if degree is None else degree
    if lengths is None:
        lengths = fit_lengths(max(candidates), degree)
    if extrapolate:
        # chunked so the exact-count cache for long lengths is released as we go
        lengths = sorted(lengths)
        values = {}
        for i in range(0, len(lengths), EXTRAPOLATION_CHUNK):
            with component_extrapolation():
                values.update(central_moments_via_partitions(p, lengths[i : i + EXTRAPOLATION_CHUNK]))
    else:
        values = central_moments_via_partitions(p, lengths)
    period = detect_period(values, degree, candidates)
    return fit(values, period, degree)


def standardized_moment(
    p: int, ell: int, method: str = "partition"
) -> StandardizedMoment | None:
    """``mu_p / mu_2**(p/2)``; None when the variance vanishes."""
    if method == "brute":
        mu = oracle_central_moment(ell, p).central_ssac
        var = oracle_central_moment(ell, 2).central_ssac
    elif method == "partition":
        vals = {q: central_moment_via_partitions(q, ell) for q in {p, 2}}
        mu, var = vals[p], vals[2]
    else:
        raise DomainError(f"unknown method {method!r}")
    return StandardizedMoment.from_moments(p, Fraction(mu), Fraction(var))


def standardized_from_fits(p: int, ell: int, mu_p: QuasiPolynomial, mu_2: QuasiPolynomial):
    return StandardizedMoment.from_moments(p, mu_p(ell), mu_2(ell))


def tatiana_limit(p: int) -> Fraction:
    """Limit of mu_p(ssac) / l**(3p/2)."""
    if p % 2:
        return Fraction(0)
    return double_factorial(p - 1) * Fraction(16, 3) ** (p // 2)


def normal_moment(p: int) -> int:
    return 0 if p % 2 else double_factorial(p - 1)


@dataclass(frozen=True)
class AsymptoticRow:
    length: int
    scaled_moment: float
    standardized: float | None
    limit_scaled: Fraction
    limit_standardized: int

    def as_dict(self) -> dict:
        return {
            "length": self.length,
            "scaled_moment": self.scaled_moment,
            "standardized": self.standardized,
            "limit_scaled": format_fraction(self.limit_scaled),
            "limit_standardized": self.limit_standardized,
        }


def asymptotic_report(
    p: int, lengths: Iterable[int], mu_p: QuasiPolynomial | None = None, mu_2: QuasiPolynomial | None = None
) -> list[AsymptoticRow]:
    """Rows of ``(l, mu_p / l**(3p/2), standardized moment)`` from fitted closed forms."""
    mu_p = fitted_moment(p) if mu_p is None else mu_p
    mu_2 = fitted_moment(2) if mu_2 is None else mu_2
    rows = []
    for l in lengths:
        m = mu_p(l)
        # l**(3p/2) may be irrational; compare squares when p is odd
        scaled = float(m / l ** (3 * p // 2)) / (l**0.5 if p % 2 else 1.0)
        st = StandardizedMoment.from_moments(p, m, mu_2(l))
        rows.append(
            AsymptoticRow(l, scaled, None if st is None else float(st), tatiana_limit(p), normal_moment(p))
        )
    return rows


# published closed forms


def mean_adf_formula(ell: int) -> Fraction:
    return 1 - Fraction(1, ell)


def variance_ssac_formula(ell: int) -> Fraction:
    tail = 0 if ell % 2 == 0 else -12
    return Fraction(16 * ell**3 - 60 * ell**2 + 56 * ell + tail, 3)


def variance_adf_formula(ell: int) -> Fraction:
    return variance_ssac_formula(ell) / ell**4


def third_ssac_formula(ell: int) -> Fraction:
    head = 160 * ell**4 - 1296 * ell**3 + 3296 * ell**2
    r = ell % 4
    if r == 0:
        return Fraction(head - 2496 * ell)
    if r == 2:
        return Fraction(head - 2496 * ell - 384)
    return Fraction(head - 2736 * ell + 576)


def third_adf_formula(ell: int) -> Fraction:
    return third_ssac_formula(ell) / ell**6


def skewness_square_formula(ell: int) -> Fraction:
    """Square of the printed standardized third moment: 108 * num**2 / den**3."""
    r = ell % 4
    num = 10 * ell**4 - 81 * ell**3 + 206 * ell**2
    if r == 0:
        num -= 156 * ell
    elif r == 2:
        num -= 156 * ell + 24
    else:
        num += -171 * ell + 36
    den = 4 * ell**3 - 15 * ell**2 + 14 * ell - (3 if ell % 2 else 0)
    return Fraction(108 * num * num, den**3)


VARIANCE_BRANCHES = {
    0: (Fraction(0), Fraction(56, 3), Fraction(-20), Fraction(16, 3)),
    1: (Fraction(-4), Fraction(56, 3), Fraction(-20), Fraction(16, 3)),
}
THIRD_BRANCHES = {
    0: (0, -2496, 3296, -1296, 160),
    1: (576, -2736, 3296, -1296, 160),
    2: (-384, -2496, 3296, -1296, 160),
    3: (576, -2736, 3296, -1296, 160),
}


@dataclass
class Comparison:
    name: str
    branch: str
    length: int
    expected: Fraction
    observed: Fraction

    @property
    def ok(self) -> bool:
        return self.expected == self.observed

    def line(self) -> str:
        status = "ok" if self.ok else "MISMATCH"
        return (
            f"{status:8s} {self.name:22s} {self.branch:14s} l={self.length:<3d} "
            f"expected={format_fraction(self.expected)} observed={format_fraction(self.observed)}"
        )


@dataclass
class VerificationReport:
    comparisons: list[Comparison] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.comparisons)

    def failures(self) -> list[Comparison]:
        return [c for c in self.comparisons if not c.ok]

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "comparisons": [
                {
                    "name": c.name,
                    "branch": c.branch,
                    "length": c.length,
                    "expected": format_fraction(c.expected),
                    "observed": format_fraction(c.observed),
                    "ok": c.ok,
                }
                for c in self.comparisons
            ],
        }


def _variance_branch(ell: int) -> str:
    return "even" if ell % 2 == 0 else "odd"


def _third_branch(ell: int) -> str:
    return {0: "0 mod 4", 2: "2 mod 4"}.get(ell % 4, "+-1 mod 4")


def closed_form_suite(
    oracle_max: int = 12, pipeline_max: int = 24, progress: Callable[[str], None] | None = None
) -> VerificationReport:
    """Compare the published mean, variance and skewness formulas with both routes."""
    report = VerificationReport()
    add = report.comparisons.append
    for l in range(1, oracle_max + 1):
        r1 = oracle_central_moment(l, 1)
        r2 = oracle_central_moment(l, 2)
        r3 = oracle_central_moment(l, 3)
        add(Comparison("mean_adf/oracle", "all", l, mean_adf_formula(l), r1.mean_adf))
        add(Comparison("variance_adf/oracle", _variance_branch(l), l, variance_adf_formula(l), r2.central_adf))
        add(Comparison("third_adf/oracle", _third_branch(l), l, third_adf_formula(l), r3.central_adf))
        if r2.central_ssac:
            sq = r3.standardized.square if r3.standardized else Fraction(0)
            add(Comparison("skewness_sq/oracle", _third_branch(l), l, skewness_square_formula(l), sq))
        if progress:
            progress(f"oracle l={l}")
    lengths = list(range(1, pipeline_max + 1))
    mu2 = central_moments_via_partitions(2, lengths)
    mu3 = central_moments_via_partitions(3, lengths)
    for l in lengths:
        add(Comparison("variance_adf/pipeline", _variance_branch(l), l, variance_adf_formula(l), Fraction(mu2[l], l**4)))
        add(Comparison("third_adf/pipeline", _third_branch(l), l, third_adf_formula(l), Fraction(mu3[l], l**6)))
    if progress:
        progress("pipeline done")
    return report
