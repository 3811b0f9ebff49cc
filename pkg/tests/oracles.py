"""Slow, obviously-correct reference implementations used only by the tests."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from adfmoments.partition import TriplePartition


def ssac_by_definition(f: tuple[int, ...]) -> int:
    n = len(f)
    total = 0
    for s in range(-n + 1, n):
        c = sum(f[j + s] * f[j] for j in range(n) if 0 <= j + s < n)
        total += c * c
    return total


def moments_by_definition(length: int, p: int) -> tuple[Fraction, Fraction]:
    """(mean ssac, p-th central moment of ssac) over every sequence, no tricks."""
    vals = [ssac_by_definition(f) for f in itertools.product((-1, 1), repeat=length)]
    mean = Fraction(sum(vals), len(vals))
    return mean, sum((v - mean) ** p for v in vals) / len(vals)


def _assignments(P: TriplePartition, ell: int, injective: bool = False):
    k = P.num_classes
    space = itertools.permutations(range(ell), k) if injective else itertools.product(range(ell), repeat=k)
    for U in space:
        ok = True
        for e in P.equations:
            base = 4 * P.equations.index(e)
            lab = P.labels[base : base + 4]
            if U[lab[0]] + U[lab[1]] != U[lab[2]] + U[lab[3]]:
                ok = False
                break
        if ok:
            yield U


def relaxed_by_enumeration(P: TriplePartition, ell: int) -> int:
    return sum(1 for _ in _assignments(P, ell))


def exact_by_enumeration(P: TriplePartition, ell: int) -> int:
    return sum(1 for _ in _assignments(P, ell, injective=True))


def satisfiable_by_search(P: TriplePartition, bound: int = 12) -> bool:
    return exact_by_enumeration(P, bound) > 0


def count_a_plus_b_eq_2c(ell: int) -> int:
    """Direct enumeration of [ell]^3."""
    r = np.arange(ell)
    return int(np.count_nonzero(r[:, None, None] + r[None, :, None] == 2 * r[None, None, :]))


def count_a_plus_b_eq_c_plus_d(ell: int) -> int:
    """Direct enumeration of [ell]^4."""
    s = np.add.outer(np.arange(ell), np.arange(ell))
    return int(np.count_nonzero(s[:, :, None, None] == s[None, None, :, :]))
