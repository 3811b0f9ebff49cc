"""Acceptance criteria 1-10, one test per criterion (8 is split into its two checks).

Each test records a one-line PASS/FAIL verdict; the lines are printed in the
terminal summary (see conftest.py).  Run alone with
``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import random
import sys
import time
from fractions import Fraction

import pytest

from adfmoments.moments import (
    THIRD_BRANCHES,
    VARIANCE_BRANCHES,
    central_moments_via_partitions,
    con_classes,
    fitted_moment,
    mean_adf_formula,
    third_adf_formula,
    variance_adf_formula,
)
from adfmoments.partition import TriplePartition
from adfmoments.quasipoly import detect_period, fit, leading_behavior
from adfmoments.satcount import count_exact, count_relaxed, is_principal
from adfmoments.seqcore import StandardizedMoment, oracle_central_moment
from adfmoments.wreath import enumerate_con_reps, generate_group, group_order, orbit_of
from oracles import (
    count_a_plus_b_eq_2c,
    count_a_plus_b_eq_c_plus_d,
    exact_by_enumeration,
)

RESULTS: dict[str, str] = {}


def record(label: str, ok: bool, detail: str, started: float, budget_s: float) -> None:
    elapsed = time.perf_counter() - started
    in_time = elapsed <= budget_s
    verdict = "PASS" if ok and in_time else "FAIL"
    RESULTS[label] = f"{verdict}  {label}: {detail} [{elapsed:.1f}s of {budget_s:.0f}s]"
    assert ok, detail
    assert in_time, f"took {elapsed:.1f}s, budget {budget_s}s"


@pytest.fixture(scope="module")
def fits():
    mu2 = central_moments_via_partitions(2, range(1, 25))
    mu3 = central_moments_via_partitions(3, range(1, 25))
    q2 = fit(mu2, detect_period(mu2, 3), 3)
    q3 = fit(mu3, detect_period(mu3, 4), 4)
    return q2, q3


def test_criterion_01_mean():
    t = time.perf_counter()
    bad = [l for l in range(1, 15) if oracle_central_moment(l, 1).mean_adf != mean_adf_formula(l)]
    record("criterion 1 (mean, l=1..14)", not bad, f"mismatches at {bad}" if bad else "exact", t, 120)


def test_criterion_02_variance():
    t = time.perf_counter()
    bad = [l for l in range(1, 15) if oracle_central_moment(l, 2).central_adf != variance_adf_formula(l)]
    mu2 = central_moments_via_partitions(2, range(1, 25))
    bad += [("pipeline", l) for l, v in mu2.items() if Fraction(v, l**4) != variance_adf_formula(l)]
    record("criterion 2 (variance, oracle l<=14, pipeline l<=24)", not bad, f"mismatches {bad}" if bad else "exact", t, 300)


def test_criterion_03_skewness():
    t = time.perf_counter()
    bad = [l for l in range(1, 13) if oracle_central_moment(l, 3).central_adf != third_adf_formula(l)]
    mu3 = central_moments_via_partitions(3, range(1, 25))
    bad += [("pipeline", l) for l, v in mu3.items() if Fraction(v, l**6) != third_adf_formula(l)]
    record("criterion 3 (third moment, oracle l<=12, pipeline l<=24)", not bad, f"mismatches {bad}" if bad else "exact", t, 1200)


def test_criterion_04_counting_lemmas():
    t = time.perf_counter()
    twin = TriplePartition.from_classes([[(0, 0, 0), (0, 0, 1)], [(0, 1, 0)], [(0, 1, 1)]])
    singles = TriplePartition.singletons(1)
    bad = []
    for l in range(0, 51):
        a = count_a_plus_b_eq_2c(l)
        b = count_a_plus_b_eq_c_plus_d(l)
        if not a == (l * l + 1) // 2 == count_relaxed(twin, l):
            bad.append(("A+B=2C", l))
        if not 3 * b == 2 * l**3 + l or b != count_relaxed(singles, l):
            bad.append(("A+B=C+D", l))
    record("criterion 4 (counting identities, l=0..50)", not bad, f"mismatches {bad}" if bad else "exact", t, 60)


def test_criterion_05_group():
    t = time.perf_counter()
    orders = {p: len(generate_group(p)) for p in (1, 2, 3)}
    ok = all(orders[p] == math.factorial(p) * 8**p == group_order(p) for p in orders)
    sizes = {p: orbit_of(TriplePartition.principal(p)).orbit_size for p in (2, 4)}
    ok &= sizes == {2: 8, 4: 192}
    record("criterion 5 (group order, principal orbits)", ok, f"orders {orders}, principal orbits {sizes}", t, 120)


def test_criterion_06_coarsening_identity():
    t = time.perf_counter()
    rng = random.Random(2024)
    bad = []
    checked = 0
    while checked < 200:
        p = rng.choice((1, 2))
        P = TriplePartition.from_labels(p, [rng.randrange(4 * p) for _ in range(4 * p)])
        ell = rng.randrange(7)
        lhs = count_relaxed(P, ell)
        rhs = sum(count_exact(Q, ell) for Q in P.coarsenings())
        brute = exact_by_enumeration(P, ell)
        if lhs != rhs or count_exact(P, ell) != brute:
            bad.append((str(P), ell))
        checked += 1
    record("criterion 6 (coarsening identity, 200 random)", not bad, f"failures {bad[:3]}" if bad else "exact", t, 300)


def test_criterion_07_quasipolynomial_recovery(fits):
    t = time.perf_counter()
    q2, q3 = fits
    ok = q2.period == 2 and q3.period == 4
    ok &= all(q2.branches[r] == VARIANCE_BRANCHES[r] for r in range(2))
    ok &= all(q3.branches[r] == tuple(Fraction(c) for c in THIRD_BRANCHES[r]) for r in range(4))
    record("criterion 7 (quasi-polynomial recovery)", ok, f"periods {q2.period}, {q3.period}", t, 1800)


def test_criterion_08a_variance_trend(fits):
    t = time.perf_counter()
    q2, _ = fits
    ratio = float(q2(512)) / 512**3
    rel = abs(ratio - 16 / 3) / (16 / 3)
    record("criterion 8a (mu2/l^3 at l=512 within 1% of 16/3)", rel < 0.01, f"ratio {ratio:.6f}, off {rel:.3%}", t, 60)


def test_criterion_08b_skewness_at_one_million(fits):
    # The standardized third moment decays like 12.99 / sqrt(l); see the README.
    t = time.perf_counter()
    q2, q3 = fits
    ell = 10**6
    skew = float(StandardizedMoment.from_moments(3, q3(ell), q2(ell)))
    record("criterion 8b (|standardized mu3| at l=1e6 below 0.01)", abs(skew) < 0.01, f"value {skew:.6f}", t, 60)


def test_criterion_09_bound_sweep():
    t = time.perf_counter()
    bad = []
    for p in (2, 3):
        bound_exp = -(-3 * p // 2) - 1
        for c in enumerate_con_reps(p):
            P = c.representative
            if is_principal(P):
                continue
            for ell in (4, 8, 16):
                if count_relaxed(P, ell) > ell**bound_exp:
                    bad.append((p, str(P), ell))
    record("criterion 9 (non-principal bound sweep)", not bad, f"violations {bad}" if bad else "all within bound", t, 600)


@pytest.mark.slow
def test_criterion_10_p4_stretch():
    t = time.perf_counter()
    lengths = range(3, 9)
    mu4 = central_moments_via_partitions(4, lengths)
    bad = [l for l in lengths if oracle_central_moment(l, 4).central_ssac != mu4[l]]
    classes = con_classes(4)
    # every component period divides 120, hence so does the period of mu_4
    q = fitted_moment(4, 6, [d for d in range(1, 121) if 120 % d == 0], extrapolate=True)
    bad += [("fit", l) for l in lengths if q(l) != mu4[l]]
    lead = leading_behavior(q, 6)
    ok = not bad and lead == Fraction(256, 3)
    detail = f"{len(classes)} classes, mismatches {bad}, period {q.period}, leading {lead}"
    record("criterion 10 (p=4 stretch)", ok, detail, t, 4 * 3600)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
