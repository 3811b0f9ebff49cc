"""Linear systems attached to partitions, and exact solution counting.

For a partition with classes ``P`` each equation ``e`` becomes the linear form
``sum_P I[e,P] * X_P`` where ``I[e,P]`` is the number of triples of ``P`` on the
left side of equation ``e`` minus the number on the right side.

* ``count_relaxed(P, l)`` counts ``U in [l]^classes`` with every form zero,
  i.e. assignments that are constant on classes but may also agree across
  classes.
* ``count_exact(P, l)`` counts the injective such ``U``; it is obtained from the
  relaxed counts by subtracting exact counts of all strict coarsenings.
"""

from __future__ import annotations

import itertools
import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DomainError
from .partition import COARSENING_CLASS_CAP, TriplePartition, normalize_rgs, set_partitions_rgs
from .quasipoly import QuasiPolynomial, fit

DENSE_STATE_CAP = 1 << 24
STATE_CAP = 1 << 26
_PERMUTE_COLUMNS_UP_TO = 6


@dataclass(frozen=True)
class LinearSystem:
    """One row per equation, one column per class of the partition."""

    rows: tuple[tuple[int, ...], ...]

    @property
    def num_vars(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def rank(self) -> int:
        return len(_rref(self.rows)[1])

    def evaluate(self, values: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(c * x for c, x in zip(row, values)) for row in self.rows)


def build_system(P: TriplePartition) -> LinearSystem:
    k = P.num_classes
    rows = []
    for j in range(P.p):
        row = [0] * k
        base = 4 * j
        for off, sign in ((0, 1), (1, 1), (2, -1), (3, -1)):
            row[P.labels[base + off]] += sign
        rows.append(tuple(row))
    return LinearSystem(tuple(rows))


# exact linear algebra


def _rref(rows: Iterable[Sequence[int]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def _primitive(row: list[int]) -> list[int]:
    g = 0
    for x in row:
        g = gcd(g, x)
    return [x // g for x in row] if g > 1 else row


def _rref_int(rows: Iterable[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Fraction-free reduced echelon form: each row is primitive and zero in other pivot columns."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        lead = m[r][c]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = _primitive([lead * a - f * b for a, b in zip(m[i], m[r])])
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def _in_row_space(rref: list[list[Fraction]], pivots: list[int], vec: Sequence[int]) -> bool:
    v = [Fraction(x) for x in vec]
    for row, c in zip(rref, pivots):
        if v[c] != 0:
            f = v[c]
            v = [a - f * b for a, b in zip(v, row)]
    return not any(v)


def is_satisfiable(P: TriplePartition) -> bool:
    """Whether some assignment over N is injective on classes and solves every equation.

    The all-ones vector lies in the kernel (row sums vanish), so kernel points
    can be translated into N, and rational points can be scaled to integers.
    A generic kernel point therefore gives a valid assignment unless some
    ``X_P - X_Q`` vanishes on the whole kernel, i.e. ``e_P - e_Q`` lies in the
    row space.
    """
    system = build_system(P)
    k = system.num_vars
    rref, pivots = _rref_int(system.rows)
    # X_c restricted to the kernel, written in the free coordinates as a
    # primitive (numerators, denominator) pair; two variables agree on the
    # whole kernel iff these coincide
    pivot_set = set(pivots)
    free = [c for c in range(k) if c not in pivot_set]
    functionals = set()
    for c in free:
        functionals.add((tuple(int(f == c) for f in free), 1))
    for row, c in zip(rref, pivots):
        den = row[c]
        nums = [-row[f] for f in free]
        if den < 0:
            den, nums = -den, [-x for x in nums]
        g = den
        for x in nums:
            g = gcd(g, x)
        functionals.add((tuple(x // g for x in nums), den // g))
    return len(functionals) == k


def is_contributory(P: TriplePartition) -> bool:
    return P.is_gelo() and is_satisfiable(P)


def contributory_quotient(P: TriplePartition) -> tuple[tuple[int, ...], ...]:
    """Quotient of a contributory separable partition, with the 3-or-4 size check."""
    q = P.quotient()
    if P.is_separable() and is_contributory(P):
        sizes = sorted(len(c) for c in q)
        assert all(n in (3, 4) for n in sizes), f"quotient class sizes {sizes} for {P}"
    return q


def is_principal(P: TriplePartition) -> bool:
    """Principality of a contributory partition (separable with all classes of size 2)."""
    if not is_contributory(P):
        raise DomainError("principality is only defined for contributory partitions")
    principal = P.is_separable() and all(n == 2 for n in P.class_sizes())
    if P.is_separable():
        quotient = contributory_quotient(P)
        by_count = P.num_classes == 2 * P.p
        by_gap = 2 * (P.num_classes - len(quotient)) >= 3 * P.p
        assert principal == by_count == by_gap, f"principality characterizations disagree on {P}"
    return principal


# relaxed counting


def _independent_rows(rows: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """A maximal independent subset, preferring sparse rows."""
    kept: list[tuple[int, ...]] = []
    rank = 0
    for row in sorted({tuple(r) for r in rows if any(r)}, key=lambda r: (sum(map(bool, r)), r)):
        if len(_rref(kept + [row])[1]) > rank:
            kept.append(row)
            rank += 1
    return kept


def _components(rows: list[tuple[int, ...]], k: int) -> tuple[list[list[int]], int]:
    """Column groups connected through shared rows, plus the number of unused columns."""
    parent = list(range(k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    used = [False] * k
    for row in rows:
        cols = [c for c, a in enumerate(row) if a]
        for c in cols:
            used[c] = True
        for c in cols[1:]:
            parent[find(c)] = find(cols[0])
    groups: dict[int, list[int]] = {}
    for c in range(k):
        if used[c]:
            groups.setdefault(find(c), []).append(c)
    return list(groups.values()), used.count(False)


def _sign_normalized(row: Sequence[int]) -> tuple[int, ...]:
    lead = next(a for a in row if a)
    return tuple(row) if lead > 0 else tuple(-a for a in row)


def _component_key(rows: list[tuple[int, ...]], cols: list[int]) -> tuple:
    """Key invariant under column order, row order and row sign."""
    sub = [[row[c] for c in cols] for row in rows]
    sub = [r for r in sub if any(r)]
    n = len(cols)
    if n > _PERMUTE_COLUMNS_UP_TO:
        return (n, tuple(sorted(_sign_normalized(r) for r in sub)))
    best = None
    for perm in itertools.permutations(range(n)):
        cand = tuple(sorted(_sign_normalized([r[i] for i in perm]) for r in sub))
        if best is None or cand < best:
            best = cand
    return (n, best)


def _variable_order(rows: list[tuple[int, ...]], n: int) -> list[int]:
    """Greedy order that retires rows early; ties by fewest touching rows."""
    remaining = set(range(n))
    touching = [{i for i, r in enumerate(rows) if r[c]} for c in range(n)]
    left = [sum(1 for c in range(n) if r[c]) for r in rows]
    active: set[int] = set()
    order = []
    while remaining:
        def score(c: int) -> tuple:
            closing = {i for i in touching[c] if left[i] == 1}
            after = (active | touching[c]) - closing
            return (len(after), len(touching[c]), c)

        c = min(remaining, key=score)
        order.append(c)
        remaining.discard(c)
        for i in touching[c]:
            left[i] -= 1
        active = {i for i in active | touching[c] if left[i] > 0}
    return order


def _count_component(key: tuple, ell: int) -> int:
    n, rows = key
    if ell <= 0:
        return 0
    order = _variable_order(list(rows), n)
    last_use = {}
    for pos, c in enumerate(order):
        for i, r in enumerate(rows):
            if r[c]:
                last_use[i] = pos
    big = n * math.log2(ell) >= 62
    try:
        return _dense_dp(rows, order, last_use, ell, object if big else np.int64)
    except CapacityError:
        return _dict_dp(rows, order, last_use, ell)


def _dense_dp(rows, order, last_use, ell, dtype) -> int:
    m = ell - 1
    # reach[pos][i]: range of what the variables from position pos on can still add to row i;
    # a partial sum outside minus that range can never return to zero and is dropped
    reach = [[(0, 0)] * len(rows) for _ in range(len(order) + 1)]
    for pos in range(len(order) - 1, -1, -1):
        c = order[pos]
        reach[pos] = [
            (a + min(0, r[c]) * m, b + max(0, r[c]) * m) for (a, b), r in zip(reach[pos + 1], rows)
        ]
    axes: list[int] = []
    lo: list[int] = []
    A = np.ones((), dtype=dtype)
    for pos, c in enumerate(order):
        for i, r in enumerate(rows):
            if r[c] and i not in axes:
                axes.append(i)
                lo.append(0)
                A = A[..., np.newaxis]
        coef = [rows[i][c] for i in axes]
        closing = [j for j, i in enumerate(axes) if last_use[i] == pos]
        keep = [j for j in range(len(axes)) if j not in closing]
        window = []
        for j in keep:
            rest_lo, rest_hi = reach[pos + 1][axes[j]]
            w_lo = max(lo[j] + min(0, coef[j]) * m, -rest_hi)
            w_hi = min(lo[j] + A.shape[j] - 1 + max(0, coef[j]) * m, -rest_lo)
            if w_hi < w_lo:
                return 0
            window.append((w_lo, w_hi))
        out_shape = [b - a + 1 for a, b in window]
        if math.prod(out_shape) > DENSE_STATE_CAP:
            raise CapacityError("dense state too large")
        B = np.zeros(out_shape, dtype=dtype)
        for u in range(ell):
            src: list = []
            dst: list = []
            ok = True
            for j in range(len(axes)):
                start = lo[j] + coef[j] * u
                if j in closing:
                    # partial + coef*u must be zero
                    t = -start
                    if not 0 <= t < A.shape[j]:
                        ok = False
                        break
                    src.append(t)
                    continue
                w_lo, w_hi = window[keep.index(j)]
                a, b = max(start, w_lo), min(start + A.shape[j] - 1, w_hi)
                if a > b:
                    ok = False
                    break
                src.append(slice(a - start, b - start + 1))
                dst.append(slice(a - w_lo, b - w_lo + 1))
            if ok:
                B[tuple(dst)] += A[tuple(src)]
        A = B
        axes = [axes[j] for j in keep]
        lo = [a for a, _ in window]
    return int(A[()]) if A.ndim == 0 else int(A.sum())


def _dict_dp(rows, order, last_use, ell) -> int:
    axes: list[int] = []
    states: dict[tuple[int, ...], int] = {(): 1}
    for pos, c in enumerate(order):
        touch = [i for i, r in enumerate(rows) if r[c]]
        new_axes = axes + [i for i in touch if i not in axes]
        pad = len(new_axes) - len(axes)
        coef = [rows[i][c] for i in new_axes]
        closing = {j for j, i in enumerate(new_axes) if last_use[i] == pos}
        keep = [j for j in range(len(new_axes)) if j not in closing]
        nxt: dict[tuple[int, ...], int] = {}
        for st, cnt in states.items():
            st = st + (0,) * pad
            for u in range(ell):
                full = [x + a * u for x, a in zip(st, coef)]
                if any(full[j] for j in closing):
                    continue
                key = tuple(full[j] for j in keep)
                nxt[key] = nxt.get(key, 0) + cnt
        if len(nxt) > STATE_CAP:
            raise CapacityError("solution-count state space exceeds the memory cap")
        states = nxt
        axes = [new_axes[j] for j in keep]
    return sum(states.values())


_component_cache: dict[tuple[tuple, int], int] = {}


DIRECT_COMPONENT_MAX = 32
_extrapolating = False


def _direct_component(key: tuple, ell: int) -> int:
    hit = _component_cache.get((key, ell))
    if hit is None:
        hit = _component_cache[(key, ell)] = _count_component(key, ell)
    return hit


def _cached_component(key: tuple, ell: int) -> int:
    if _extrapolating and ell > DIRECT_COMPONENT_MAX:
        value = component_quasipolynomial(key)(ell)
        assert value.denominator == 1
        return int(value)
    return _direct_component(key, ell)


def _solve_square(a: list[list[Fraction]], b: list[list[Fraction]]) -> list[list[Fraction]] | None:
    """``a^{-1} b`` by Gauss-Jordan, or None when ``a`` is singular."""
    n = len(a)
    m = [ra + rb for ra, rb in zip(a, b)]
    for col in range(n):
        piv = next((k for k in range(col, n) if m[k][col]), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for k in range(n):
            if k != col and m[k][col]:
                f = m[k][col]
                m[k] = [x - f * y for x, y in zip(m[k], m[col])]
    return [row[n:] for row in m]


@lru_cache(maxsize=None)
def vertex_denominator(key: tuple) -> int:
    """Lcm of the coordinate denominators of the vertices of {x in [0,1]^n : Ax = 0}.

    The count over [l] is the lattice-point count of the (l-1)-th dilate of
    that polytope, so this bounds the period of its quasi-polynomial.
    """
    n, rows = key
    r = len(rows)
    den = 1
    for fixed in itertools.combinations(range(n), n - r):
        rest = [i for i in range(n) if i not in fixed]
        a = [[Fraction(row[i]) for i in rest] for row in rows]
        b = [[Fraction(-row[i]) for i in fixed] for row in rows]
        sol = _solve_square(a, b)
        if sol is None:
            continue
        for corner in itertools.product((0, 1), repeat=n - r):
            x = [sum((c * v for c, v in zip(srow, corner)), Fraction(0)) for srow in sol]
            if all(0 <= xi <= 1 for xi in x):
                for xi in x:
                    den = math.lcm(den, xi.denominator)
    return den


@lru_cache(maxsize=None)
def component_quasipolynomial(key: tuple) -> QuasiPolynomial:
    """Solution count of one connected component as a quasi-polynomial in l >= 1.

    The degree is the kernel dimension (constant vectors are interior points)
    and the period is ``vertex_denominator``; one held-out sample per residue
    guards the interpolation.
    """
    n, rows = key
    degree = n - len(rows)
    m = vertex_denominator(key)
    return fit({l: _direct_component(key, l) for l in range(1, m * (degree + 2) + 1)}, m, degree)


@contextmanager
def component_extrapolation():
    """Within the block, component counts beyond ``DIRECT_COMPONENT_MAX`` come from
    their fitted quasi-polynomials instead of the DP.  Exact counts computed that
    way are dropped from the cache on exit."""
    global _extrapolating
    previous = _extrapolating
    _extrapolating = True
    try:
        yield
    finally:
        _extrapolating = previous
        if not previous:
            for k in [k for k in _exact_cache if k[-1] > DIRECT_COMPONENT_MAX]:
                del _exact_cache[k]


@lru_cache(maxsize=None)
def _factorization(rows: tuple[tuple[int, ...], ...], k: int) -> tuple[tuple[tuple, ...], int]:
    kept = _independent_rows(rows)
    groups, free = _components(kept, k)
    return tuple(_component_key(kept, g) for g in groups), free


def count_system(system: LinearSystem, ell: int) -> int:
    """Solutions of ``system`` with every variable in ``[ell]``."""
    if ell < 0:
        raise DomainError("ell must be nonnegative")
    k = system.num_vars
    if k == 0:
        return 1
    if ell == 0:
        return 0
    keys, free = _factorization(system.rows, k)
    total = ell**free
    for key in keys:
        total *= _cached_component(key, ell)
        if not total:
            break
    return total


def count_relaxed(P: TriplePartition, ell: int) -> int:
    """Assignments in [ell], constant on each class, solving every equation."""
    return count_system(build_system(P), ell)


# exact counting by subtraction over coarsenings

_exact_cache: dict[tuple[tuple[int, ...], tuple[int, ...], int], int] = {}


def count_exact(P: TriplePartition, ell: int) -> int:
    """Assignments in [ell] taking equal values exactly on the classes of P."""
    return exact_counts(P, [ell])[0]


def exact_counts(P: TriplePartition, ells: Sequence[int], cap: int = COARSENING_CLASS_CAP) -> list[int]:
    """``count_exact(P, l)`` for each ``l`` in ``ells``, sharing the coarsening lattice."""
    ells = list(ells)
    missing = [l for l in ells if (P.equations, P.labels, l) not in _exact_cache]
    if missing:
        _fill_lattice(P, missing, cap)
    return [_exact_cache[(P.equations, P.labels, l)] for l in ells]


def _fill_lattice(P: TriplePartition, ells: list[int], cap: int) -> None:
    k = P.num_classes
    if k > cap:
        raise CapacityError(f"{k} classes exceeds the coarsening cap {cap}")
    patterns = sorted(set_partitions_rgs(k), key=lambda r: max(r) if r else 0)
    exact: dict[tuple[int, ...], list[int]] = {}
    for pat in patterns:
        Q = P.merge(pat)
        ckey = (Q.equations, Q.labels)
        cached = [_exact_cache.get(ckey + (l,)) for l in ells]
        if all(x is not None for x in cached):
            exact[pat] = cached
            continue
        vals = [count_relaxed(Q, l) for l in ells]
        nblocks = (max(pat) + 1) if pat else 0
        for sub in set_partitions_rgs(nblocks):
            if nblocks and max(sub) + 1 == nblocks:
                continue  # identity coarsening
            coarser = normalize_rgs([sub[b] for b in pat])
            vals = [a - b for a, b in zip(vals, exact[coarser])]
        exact[pat] = vals
        for l, x in zip(ells, vals):
            _exact_cache[ckey + (l,)] = x


def clear_caches() -> None:
    _component_cache.clear()
    _exact_cache.clear()
    _factorization.cache_clear()
    component_quasipolynomial.cache_clear()
    vertex_denominator.cache_clear()
