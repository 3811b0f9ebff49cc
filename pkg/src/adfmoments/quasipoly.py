"""Quasi-polynomials with rational coefficients: exact fitting and evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Mapping, Sequence

from .errors import DomainError, FitError

DEFAULT_PERIODS = (1, 2, 4, 8)


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class QuasiPolynomial:
    """``branches[l % period]`` holds ascending-power coefficients used at ``l``."""

    period: int
    branches: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if self.period < 1 or len(self.branches) != self.period:
            raise DomainError("need exactly one branch per residue class")
        width = max(len(b) for b in self.branches)
        padded = tuple(tuple(Fraction(c) for c in b) + (Fraction(0),) * (width - len(b)) for b in self.branches)
        object.__setattr__(self, "branches", padded)

    @property
    def degree(self) -> int:
        nz = [i for b in self.branches for i, c in enumerate(b) if c]
        return max(nz) if nz else 0

    def __call__(self, ell: int) -> Fraction:
        return evaluate(self, ell)

    def coefficient(self, residue: int, power: int) -> Fraction:
        b = self.branches[residue % self.period]
        return b[power] if power < len(b) else Fraction(0)

    def reduced(self) -> "QuasiPolynomial":
        """Smallest period dividing this one that describes the same function."""
        for m in range(1, self.period + 1):
            if self.period % m:
                continue
            if all(self.branches[r] == self.branches[r % m] for r in range(self.period)):
                return QuasiPolynomial(m, self.branches[:m])
        return self

    def to_json(self) -> dict:
        return {
            "period": self.period,
            "branches": [
                {"residue": r, "coeffs": [_fmt(c) for c in b]} for r, b in enumerate(self.branches)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "QuasiPolynomial":
        branches = sorted(data["branches"], key=lambda b: b["residue"])
        return cls(int(data["period"]), tuple(tuple(Fraction(c) for c in b["coeffs"]) for b in branches))

    def pretty(self, var: str = "l") -> str:
        """Case display, one line per group of residues sharing a polynomial."""
        groups: dict[tuple[Fraction, ...], list[int]] = {}
        for r, b in enumerate(self.branches):
            groups.setdefault(b, []).append(r)
        lines = []
        for b, residues in groups.items():
            cond = "always" if self.period == 1 else (
                f"if {var} = {', '.join(map(str, residues))} mod {self.period}"
            )
            lines.append(f"{_poly_str(b, var)}    {cond}")
        return "\n".join(lines)


def _poly_str(coeffs: Sequence[Fraction], var: str) -> str:
    den = 1
    for c in coeffs:
        den = lcm(den, c.denominator)
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i] * den
        if not c:
            continue
        c = int(c)
        mag = abs(c)
        if i == 0:
            body = str(mag)
        else:
            pw = var if i == 1 else f"{var}^{i}"
            body = pw if mag == 1 else f"{mag}*{pw}"
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    if not terms:
        return "0"
    text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text if den == 1 else f"({text})/{den}"


def evaluate(q: QuasiPolynomial, ell: int) -> Fraction:
    if ell < 0:
        raise DomainError("evaluation point must be nonnegative")
    acc = Fraction(0)
    for c in reversed(q.branches[ell % q.period]):
        acc = acc * ell + c
    return acc


def leading_behavior(q: QuasiPolynomial, power: int) -> Fraction:
    """Coefficient of ``l**power``, which must agree across residue classes."""
    if power != int(power) or power < 0:
        raise DomainError("power must be a nonnegative integer")
    vals = {q.coefficient(r, int(power)) for r in range(q.period)}
    if len(vals) != 1:
        raise DomainError(f"residue classes disagree at power {power}")
    return vals.pop()


def interpolate(points: Sequence[tuple[int, Fraction]]) -> tuple[Fraction, ...]:
    """Ascending coefficients of the unique polynomial through ``points`` (Newton form)."""
    xs = [Fraction(x) for x, _ in points]
    coef = [Fraction(y) for _, y in points]
    n = len(xs)
    if len(set(xs)) != n:
        raise FitError("interpolation nodes must be distinct")
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        # poly = poly * (x - xs[i]) + coef[i]
        nxt = [Fraction(0)] * n
        for k in range(n - 1):
            nxt[k + 1] += poly[k]
        for k in range(n):
            nxt[k] -= xs[i] * poly[k]
        nxt[0] += coef[i]
        poly = nxt
    return tuple(poly)


def fit(values: Mapping[int, Fraction | int], period: int, degree: int) -> QuasiPolynomial:
    """Exact per-residue interpolation, verified on every sample beyond the first ``degree+1``."""
    if period < 1 or degree < 0:
        raise DomainError("period must be positive and degree nonnegative")
    branches = []
    for r in range(period):
        pts = sorted((l, Fraction(v)) for l, v in values.items() if l % period == r)
        if len(pts) < degree + 2:
            raise FitError(
                f"residue {r} mod {period} has {len(pts)} samples; need {degree + 2}"
            )
        coeffs = interpolate(pts[: degree + 1])
        branch = QuasiPolynomial(1, (coeffs,))
        for l, v in pts[degree + 1 :]:
            if evaluate(branch, l) != v:
                raise FitError(f"held-out sample at {l} disagrees for period {period}, degree {degree}")
        branches.append(coeffs)
    return QuasiPolynomial(period, tuple(branches))


def detect_period(
    values: Mapping[int, Fraction | int], degree: int, candidates: Sequence[int] = DEFAULT_PERIODS
) -> int:
    """Smallest candidate period whose fit verifies on all held-out samples."""
    for m in sorted(candidates):
        try:
            fit(values, m, degree)
        except FitError:
            continue
        return m
    raise FitError(
        f"no period among {sorted(candidates)} fits at degree {degree}; "
        "try more candidates, a higher degree, or more samples"
    )
