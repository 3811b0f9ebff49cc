from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from adfmoments.errors import CapacityError, DomainError
from adfmoments.partition import TriplePartition, all_partitions
from adfmoments.satcount import (
    LinearSystem,
    build_system,
    _factorization,
    clear_caches,
    component_extrapolation,
    component_quasipolynomial,
    vertex_denominator,
    contributory_quotient,
    count_exact,
    count_relaxed,
    count_system,
    exact_counts,
    is_contributory,
    is_principal,
    is_satisfiable,
)
from adfmoments.wreath import WreathElement, enumerate_con_reps
from oracles import (
    count_a_plus_b_eq_2c,
    count_a_plus_b_eq_c_plus_d,
    exact_by_enumeration,
    relaxed_by_enumeration,
    satisfiable_by_search,
)

SINGLES = TriplePartition.singletons(1)
TWIN = TriplePartition.from_classes([[(0, 0, 0), (0, 0, 1)], [(0, 1, 0)], [(0, 1, 1)]])
A_PLUS_B_EQ_A_PLUS_C = TriplePartition.from_classes([[(0, 0, 0), (0, 1, 0)], [(0, 0, 1)], [(0, 1, 1)]])
Q2 = TriplePartition.principal(2)

small = st.integers(1, 2).flatmap(
    lambda p: st.lists(st.integers(0, 7), min_size=4 * p, max_size=4 * p).map(
        lambda lab: TriplePartition.from_labels(len(lab) // 4, lab)
    )
)


def test_build_system_examples():
    assert build_system(SINGLES).rows == ((1, 1, -1, -1),)
    assert build_system(TWIN).rows == ((2, -1, -1),)
    rows = build_system(Q2).rows
    assert len(rows) == 2 and rows[0] == rows[1]


@given(small)
def test_rows_sum_to_zero_and_match_slot_counts(P):
    sysm = build_system(P)
    assert sysm.num_vars == P.num_classes
    for k, row in enumerate(sysm.rows):
        assert sum(row) == 0
        for b, cls in enumerate(P.classes):
            left = sum(1 for t in cls if t.e == P.equations[k] and t.s == 0)
            right = sum(1 for t in cls if t.e == P.equations[k] and t.s == 1)
            assert row[b] == left - right


def test_satisfiability_examples():
    assert is_satisfiable(SINGLES)
    assert not is_satisfiable(A_PLUS_B_EQ_A_PLUS_C)
    assert is_satisfiable(Q2)


def test_kernel_test_matches_bounded_search_on_all_of_p1_and_sampled_p2():
    for P in all_partitions(1):
        assert is_satisfiable(P) == satisfiable_by_search(P, 12)
    rng = random.Random(0)
    parts = list(all_partitions(2))
    for P in rng.sample(parts, 250) + [P for P in parts if P.is_gelo()]:
        if P.num_classes <= 5:
            assert is_satisfiable(P) == satisfiable_by_search(P, 12), str(P)


def test_relaxed_count_examples():
    assert count_relaxed(SINGLES, 2) == 6
    assert count_relaxed(TWIN, 3) == 5
    assert count_relaxed(Q2, 2) == 6
    assert count_relaxed(SINGLES, 0) == 0
    assert count_system(LinearSystem(()), 0) == 1
    empty = TriplePartition((), ())
    assert count_relaxed(empty, 0) == 1 and count_relaxed(empty, 5) == 1


def test_exact_count_examples():
    assert count_exact(SINGLES, 2) == 0
    # pairwise-distinct solutions of A+B=C+D in [4]: {0,3} against {1,2}, 2*2*2 orders
    assert count_exact(SINGLES, 4) == 8 == exact_by_enumeration(SINGLES, 4)
    total = sum(c.orbit_size * count_exact(c.representative, 4) for c in enumerate_con_reps(2))
    assert total == 96


@pytest.mark.parametrize("ell", range(0, 31))
def test_single_equation_counting_identities(ell):
    assert count_relaxed(TWIN, ell) == count_a_plus_b_eq_2c(ell) == (ell * ell + 1) // 2
    assert count_relaxed(SINGLES, ell) == count_a_plus_b_eq_c_plus_d(ell) == (2 * ell**3 + ell) // 3


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(small, st.integers(0, 5))
def test_counts_match_enumeration(P, ell):
    if P.num_classes > 6 and ell > 3:
        ell = 3
    assert count_relaxed(P, ell) == relaxed_by_enumeration(P, ell)
    assert count_exact(P, ell) == exact_by_enumeration(P, ell)


@settings(max_examples=40, deadline=None)
@given(small, st.integers(1, 6))
def test_relaxed_dominates_exact(P, ell):
    assert count_relaxed(P, ell) >= count_exact(P, ell) >= 0


def test_monotone_under_coarsening():
    rng = random.Random(4)
    for _ in range(60):
        p = rng.choice((1, 2))
        P = TriplePartition.from_labels(p, [rng.randrange(8) for _ in range(4 * p)])
        Q = rng.choice(list(P.coarsenings()))
        for ell in range(1, 7):
            assert count_relaxed(P, ell) >= count_relaxed(Q, ell)


def test_relaxed_count_is_orbit_invariant():
    rng = random.Random(8)
    for _ in range(60):
        p = rng.choice((1, 2))
        P = TriplePartition.from_labels(p, [rng.randrange(8) for _ in range(4 * p)])
        g = WreathElement.random(p, rng)
        for ell in (2, 4, 6):
            assert count_relaxed(g.act_partition(P), ell) == count_relaxed(P, ell)


def test_coarsenings_partition_the_relaxed_solutions():
    rng = random.Random(12)
    for _ in range(30):
        p = rng.choice((1, 2))
        P = TriplePartition.from_labels(p, [rng.randrange(6) for _ in range(4 * p)])
        for ell in range(0, 7):
            assert sum(count_exact(Q, ell) for Q in P.coarsenings()) == count_relaxed(P, ell)


def test_cache_does_not_change_answers():
    P = TriplePartition.from_labels(2, [0, 1, 2, 3, 1, 0, 3, 2])
    first = exact_counts(P, range(8))
    clear_caches()
    assert exact_counts(P, range(8)) == first == [count_exact(P, l) for l in range(8)]


def test_exact_count_class_cap():
    with pytest.raises(CapacityError):
        exact_counts(TriplePartition.singletons(4), [3])


def test_negative_length_is_a_domain_error():
    with pytest.raises(DomainError):
        count_relaxed(SINGLES, -1)


@pytest.mark.parametrize("p", [2, 3])
def test_separable_structure_and_principal_equivalences(p):
    for c in enumerate_con_reps(p):
        P = c.representative
        assert is_contributory(P)
        if not P.is_separable():
            continue
        groups = contributory_quotient(P)
        assert all(len(g) in (3, 4) for g in groups)
        for g in groups:
            E = P.support(g[0])
            assert len(E) % 2 == 0
            sizes = sorted(len(P.classes[b]) for b in g)
            twin = [b for b in g if P.is_twin_class(b)]
            if len(g) == 3:
                # one class with both places of a side everywhere, two matching halves
                assert len(twin) == 1 and len(P.classes[twin[0]]) == 2 * len(E)
                rest = [len(P.classes[b]) for b in g if b not in twin]
                assert rest == [len(E), len(E)]
            else:
                assert not twin and sizes == [len(E)] * 4
        principal = is_principal(P)
        assert principal == (P.num_classes == 2 * p) == (P.num_classes - len(P.quotient()) >= 1.5 * p)


def test_is_principal_requires_contributory():
    with pytest.raises(DomainError):
        is_principal(TriplePartition.one_class(2))
    assert is_principal(TriplePartition.principal(2))
    assert not any(is_principal(c.representative) for c in enumerate_con_reps(3))


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("ell", [4, 8, 16])
def test_bounds_on_contributory_classes(p, ell):
    for c in enumerate_con_reps(p):
        P = c.representative
        relaxed = count_relaxed(P, ell)
        if not is_principal(P):
            assert relaxed <= ell ** (-(-3 * p // 2) - 1)
        if P.is_separable():
            assert relaxed <= ell ** (P.num_classes - len(P.quotient()))


def test_principal_p2_asymptote():
    ell = 512
    ratio = count_exact(Q2, ell) / ell**3
    assert abs(ratio - 2 / 3) / (2 / 3) < 0.01


def test_principal_relaxed_count_is_a_power():
    for p in (2, 4):
        Q = TriplePartition.principal(p)
        for ell in (2, 3, 5):
            assert count_relaxed(Q, ell) == ((2 * ell**3 + ell) // 3) ** (p // 2)


def _components_of(P):
    s = build_system(P)
    return _factorization(s.rows, s.num_vars)[0]


@pytest.mark.parametrize("p", [2, 3])
def test_component_quasipolynomials_predict_longer_lengths(p):
    keys = {k for c in enumerate_con_reps(p) for Q in c.representative.coarsenings() for k in _components_of(Q)}
    assert keys
    for key in keys:
        q = component_quasipolynomial(key)
        rows = key[1]
        for ell in (41, 47):
            assert q(ell) == count_system(LinearSystem(rows), ell)


def test_component_extrapolation_matches_direct_counts():
    clear_caches()
    P = next(c.representative for c in enumerate_con_reps(3) if c.representative.num_classes >= 6)
    direct = exact_counts(P, [40, 45])
    clear_caches()
    with component_extrapolation():
        assert exact_counts(P, [40, 45]) == direct
    assert count_exact(P, 45) == direct[1]


def test_vertex_denominators():
    assert vertex_denominator((3, ((1, 1, -2),))) == 2  # vertex (0, 1, 1/2)
    assert vertex_denominator((4, ((1, 1, -1, -1),))) == 1
    # x0 + x1 = 3 x2 has the vertex (0, 1, 1/3)
    assert vertex_denominator((3, ((1, 1, -3),))) == 3


def test_component_period_is_not_visible_at_small_lengths():
    # only constant solutions exist until l is large enough; a fit from the
    # first few samples alone would wrongly predict l
    key = (5, ((0, 0, 1, -2, 1), (0, 1, -2, 0, 1), (1, 0, 1, 0, -2)))
    assert [count_system(LinearSystem(key[1]), l) for l in range(1, 6)] == [1, 2, 3, 4, 5]
    q = component_quasipolynomial(key)
    assert q(36) == count_system(LinearSystem(key[1]), 36) == 216
