"""Binary sequences, aperiodic autocorrelation, and the exhaustive moment oracle.

All quantities are exact: sums of squared autocorrelations are integers and
moments are ``fractions.Fraction``.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DomainError

LENGTH_CAP = 20
_CHUNK_BITS = 16


@dataclass(frozen=True)
class BinarySequence:
    """Symbols ``f_0 .. f_{l-1}`` in {-1, +1}; ``f_j = 0`` elsewhere."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        vals = tuple(int(x) for x in self.values)
        if any(x not in (-1, 1) for x in vals):
            raise DomainError("binary sequence symbols must be -1 or +1")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_bits(cls, bits: int, length: int) -> "BinarySequence":
        """Bit j of ``bits`` gives symbol ``2*b - 1`` at position j."""
        return cls(tuple(2 * ((bits >> j) & 1) - 1 for j in range(length)))

    @property
    def length(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int) -> int:
        return self.values[j] if 0 <= j < len(self.values) else 0

    def negated(self) -> "BinarySequence":
        return BinarySequence(tuple(-x for x in self.values))

    def reversed(self) -> "BinarySequence":
        return BinarySequence(self.values[::-1])


def _as_sequence(f: BinarySequence | Sequence[int]) -> BinarySequence:
    return f if isinstance(f, BinarySequence) else BinarySequence(tuple(f))


def autocorrelation(f: BinarySequence | Sequence[int], s: int) -> int:
    f = _as_sequence(f)
    n = len(f)
    s = abs(s)  # real sequences
    if s >= n:
        return 0
    v = f.values
    return sum(v[j + s] * v[j] for j in range(n - s))


def ssac(f: BinarySequence | Sequence[int]) -> int:
    """Sum of squared autocorrelations over every shift, including 0."""
    f = _as_sequence(f)
    n = len(f)
    return sum(autocorrelation(f, s) ** 2 for s in range(-n + 1, n))


def adf(f: BinarySequence | Sequence[int]) -> Fraction:
    """Autocorrelation demerit factor."""
    f = _as_sequence(f)
    n = len(f)
    if n == 0:
        raise DomainError("demerit factor is undefined for the empty sequence")
    return Fraction(ssac(f), n * n) - 1


def ssac_table(length: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """ssac for the sequences encoded by the integers in ``[start, stop)``."""
    if stop is None:
        stop = 1 << length
    codes = np.arange(start, stop, dtype=np.int64)
    if length == 0:
        return np.zeros(len(codes), dtype=np.int64)
    bits = (codes[:, None] >> np.arange(length, dtype=np.int64)) & 1
    f = (2 * bits - 1).astype(np.int64)
    total = np.full(len(codes), length * length, dtype=np.int64)
    for s in range(1, length):
        c = np.einsum("ij,ij->i", f[:, s:], f[:, :-s])
        total += 2 * c * c
    return total


def _chunk_histogram(args: tuple[int, int, int]) -> dict[int, int]:
    length, a, b = args
    vals, counts = np.unique(ssac_table(length, a, b), return_counts=True)
    return dict(zip(vals.tolist(), counts.tolist()))


def ssac_histogram(length: int, use_negation: bool = True, workers: int = 1) -> Counter:
    """Multiplicity of each ssac value over all 2**length sequences.

    With ``use_negation`` only sequences whose top symbol is +1 are visited
    (negation preserves ssac) and each count is doubled.  ``workers > 1``
    spreads the chunks over a process pool; the integer reduction makes the
    result independent of the worker count.
    """
    if length == 0:
        return Counter({0: 1})
    if use_negation:
        lo, hi, weight = 1 << (length - 1), 1 << length, 2
    else:
        lo, hi, weight = 0, 1 << length, 1
    step = 1 << _CHUNK_BITS
    jobs = [(length, a, min(a + step, hi)) for a in range(lo, hi, step)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_histogram, jobs))
    else:
        parts = [_chunk_histogram(j) for j in jobs]
    hist: Counter = Counter()
    for part in parts:
        for v, c in part.items():
            hist[v] += weight * c
    return hist


def central_moment(hist: Counter, p: int) -> Fraction:
    """Exact p-th central moment of a distribution given as value -> multiplicity."""
    n = sum(hist.values())
    total = sum(v * c for v, c in hist.items())
    # E[(v - total/n)^p] = sum c (n v - total)^p / n^(p+1)
    acc = sum(c * (n * v - total) ** p for v, c in hist.items())
    return Fraction(acc, n ** (p + 1))


@dataclass(frozen=True)
class StandardizedMoment:
    """``mu_p / mu_2**(p/2)`` kept exact as a sign and a rational square.

    For even p the value itself is rational and available as ``exact``.
    """

    p: int
    sign: int
    square: Fraction

    @classmethod
    def from_moments(cls, p: int, mu_p: Fraction, variance: Fraction) -> "StandardizedMoment | None":
        if variance == 0:
            return None
        sign = (mu_p > 0) - (mu_p < 0)
        return cls(p, sign, Fraction(mu_p) ** 2 / Fraction(variance) ** p)

    @property
    def exact(self) -> Fraction | None:
        if self.p % 2:
            return None
        root = _fraction_sqrt(self.square)
        return None if root is None else self.sign * root

    def decimal(self, digits: int = 50) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = digits + 10
            root = (Decimal(self.square.numerator) / Decimal(self.square.denominator)).sqrt()
            ctx.prec = digits
            return +(self.sign * root)

    def __float__(self) -> float:
        return float(self.decimal(20))

    def as_dict(self) -> dict:
        out = {"sign": self.sign, "square": format_fraction(self.square), "decimal": str(self.decimal())}
        if self.exact is not None:
            out["exact"] = format_fraction(self.exact)
        return out


def _fraction_sqrt(x: Fraction) -> Fraction | None:
    a, b = isqrt(x.numerator), isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


@dataclass(frozen=True)
class MomentReport:
    length: int
    p: int
    central_ssac: Fraction
    central_adf: Fraction
    standardized: StandardizedMoment | None
    mean_adf: Fraction

    def as_dict(self) -> dict:
        return {
            "length": self.length,
            "p": self.p,
            "central_ssac": format_fraction(self.central_ssac),
            "central_adf": format_fraction(self.central_adf),
            "standardized": None if self.standardized is None else self.standardized.as_dict(),
            "mean_adf": format_fraction(self.mean_adf),
        }


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def oracle_central_moment(
    length: int, p: int, cap: int = LENGTH_CAP, use_negation: bool = True, workers: int = 1
) -> MomentReport:
    """Exact moments of ssac and of the demerit factor over all 2**length sequences."""
    if length < 1:
        raise DomainError("length must be at least 1")
    if length > cap:
        raise CapacityError(f"length {length} exceeds the oracle cap {cap}")
    if p < 0:
        raise DomainError("p must be nonnegative")
    hist = _histogram(length, use_negation, workers)
    return report_from_histogram(length, p, hist)


_HISTOGRAMS: dict[tuple[int, bool], Counter] = {}


def _histogram(length: int, use_negation: bool, workers: int) -> Counter:
    key = (length, use_negation)
    if key not in _HISTOGRAMS:
        _HISTOGRAMS[key] = ssac_histogram(length, use_negation, workers)
    return _HISTOGRAMS[key]


def clear_oracle_cache() -> None:
    _HISTOGRAMS.clear()


def report_from_histogram(length: int, p: int, hist: Counter) -> MomentReport:
    n = sum(hist.values())
    mu = central_moment(hist, p)
    var = central_moment(hist, 2)
    mean_ssac = Fraction(sum(v * c for v, c in hist.items()), n)
    return MomentReport(
        length=length,
        p=p,
        central_ssac=mu,
        central_adf=mu / length ** (2 * p),
        standardized=StandardizedMoment.from_moments(p, mu, var),
        mean_adf=mean_ssac / (length * length) - 1,
    )


def all_sequences(length: int) -> Iterable[BinarySequence]:
    for code in range(1 << length):
        yield BinarySequence.from_bits(code, length)
