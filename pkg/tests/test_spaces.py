import math
from fractions import Fraction

import numpy as np
import pytest

from hypfl import (GridFunction, GridSpec, IndexTuple, admissibility_decision,
                   besov_embedding_decision, besov_embeds_fl, besov_norm,
                   bessel_potential, build_dyadic_family, conjugate,
                   fio_besov_to_fl_admissible, fio_triebel_to_fl_admissible,
                   fl_norm, forward_transform, recip, spatial_lp_norm,
                   triebel_embedding_decision, triebel_embeds_fl, triebel_norm)

INF = math.inf


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    return GridFunction(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


# ---------------------------------------------------------------------------
# norms


def test_fl_norm_single_mode():
    g = GridSpec(1, 64)
    x = g.axis_points()
    f = GridFunction(g, np.exp(2j * np.pi * 3 * x))
    # one unit coefficient at k=3: every FL^p_s norm is <3>^s
    for p in (1.0, 2.0, INF):
        assert abs(fl_norm(f, p, 0.0).value - 1.0) < 1e-12
        assert abs(fl_norm(f, p, 2.0).value - 10.0) < 1e-10  # <3>^2 = 10


def test_fl2_equals_l2():
    for d, n in ((1, 256), (2, 64)):
        g = GridSpec(d, n)
        for seed in range(5):
            f = random_field(g, seed)
            assert abs(fl_norm(f, 2.0, 0.0).value - spatial_lp_norm(f, 2.0)) < 1e-10


def test_fl_norm_monotone_in_p():
    g = GridSpec(1, 64)
    f = random_field(g, 4)
    n1 = fl_norm(f, 1.0, 0.0).value
    n2 = fl_norm(f, 2.0, 0.0).value
    ninf = fl_norm(f, INF, 0.0).value
    assert n1 >= n2 >= ninf > 0


def test_bessel_is_exact_fl_isometry():
    g = GridSpec(1, 128)
    for seed in range(3):
        f = random_field(g, 40 + seed)
        for sigma in (0.5, 1.0, -0.75):
            Jf = bessel_potential(f, sigma)
            for p, alpha in ((1.0, 0.0), (2.0, 0.5), (INF, -0.25)):
                a = fl_norm(Jf, p, alpha).value
                b = fl_norm(f, p, alpha + sigma).value
                assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_besov_single_block_collapses_to_lp():
    g = GridSpec(1, 64)
    fam = build_dyadic_family(g)
    x = g.axis_points()
    f = GridFunction(g, np.exp(2j * np.pi * 4 * x))  # lives in block j=2 only
    for q in (1.0, 2.0, INF):
        val = besov_norm(f, 2.0, q, 1.0, fam).value
        assert abs(val - 2.0 ** 2 * spatial_lp_norm(f, 2.0)) < 1e-12


def test_besov_equals_triebel_at_qp():
    # B^s_{p,p} = F^s_{p,p} identically (the inner/outer sums coincide)
    g = GridSpec(1, 128)
    fam = build_dyadic_family(g)
    f = random_field(g, 9)
    for p in (1.0, 2.0, 3.0):
        for s in (0.0, 0.7):
            b = besov_norm(f, p, p, s, fam).value
            t = triebel_norm(f, p, p, s, fam).value
            assert abs(b - t) <= 1e-10 * max(1.0, b)


def test_b022_comparable_to_fl2():
    # B^0_{2,2} and FL^2 agree up to the measured block-overlap constants
    g = GridSpec(1, 256)
    fam = build_dyadic_family(g)
    overlap = np.sum(fam.cutoffs ** 2, axis=0)
    lo, hi = np.sqrt(overlap.min()), np.sqrt(overlap.max())
    assert 0 < lo <= hi <= 1.0 + 1e-12
    for seed in range(5):
        f = random_field(g, 60 + seed)
        b = besov_norm(f, 2.0, 2.0, 0.0, fam).value
        fl = fl_norm(f, 2.0, 0.0).value
        assert lo * fl - 1e-10 <= b <= hi * fl + 1e-10


def test_triebel_rejects_p_inf():
    g = GridSpec(1, 64)
    fam = build_dyadic_family(g)
    f = random_field(g, 2)
    with pytest.raises(ValueError):
        triebel_norm(f, INF, 2.0, 0.0, fam)


def test_norm_result_payload():
    g = GridSpec(1, 64)
    f = random_field(g, 1)
    res = fl_norm(f, INF, 0.5)
    d = res.to_dict()
    assert d["p"] == "inf" and d["space"] == "fl" and d["n"] == 64


# ---------------------------------------------------------------------------
# conjugates and reciprocal helpers


def test_recip_and_conjugate():
    assert recip(INF) == 0
    assert recip(2) == 0.5
    assert conjugate(2) == 2
    assert conjugate(1) == INF
    assert conjugate(0.5) == INF
    assert conjugate(INF) == 1
    assert conjugate(4) == Fraction(4, 3)


# ---------------------------------------------------------------------------
# the hand-evaluated predicate table
#
# Columns: (p, q, r, s, d, expected verdict, substring of the deciding clause).
# Boundary rows exercise both sides of every strict/non-strict inequality.

BESOV_TABLE = [
    (2, 2, 2, 0.0, 1, True, "clause (1)"),        # both gates and s at the boundary
    (1, 1, 1, 1.0, 1, True, "clause (1)"),        # s = d(1/r+1/p-1) exactly, non-strict
    (1, 1, 1, 0.99, 1, False, "clause (1)"),      # just below the boundary
    (1, 2, 1, 1.0, 1, False, "clause (2)"),       # q > r demands strict; equality fails
    (1, 2, 1, 1.01, 1, True, "clause (2)"),       # just above: strict holds
    (2, 1, 2, 0.0, 1, True, "clause (1)"),
    (2, INF, 2, 0.0, 1, False, "clause (2)"),     # q = inf > r, s = gap
    (2, INF, 2, 0.25, 1, True, "clause (2)"),
    (3, 2, 2, 5.0, 1, False, "gate"),             # p > 2 (and 1/p + 1/r < 1)
    (2, 2, 4, 0.0, 1, False, "gate"),             # 1/p + 1/r = 3/4 < 1
    (1, 1, INF, 0.0, 1, True, "clause (1)"),      # r = inf, gap = 0
    (1, 1, INF, -0.01, 1, False, "clause (1)"),
    (1, INF, INF, 0.0, 1, True, "clause (1)"),    # q = r = inf counts as q <= r
    (1, INF, 2, 0.5, 1, False, "clause (2)"),     # strict boundary from below
    (1, INF, 2, 0.51, 1, True, "clause (2)"),
    (0.5, 2, 2, 1.5, 1, True, "clause (1)"),      # quasi-Banach p < 1
    (2, 2, 2, -0.5, 2, False, "clause (1)"),
    (2, 2, 2, 0.0, 2, True, "clause (1)"),        # d = 2 boundary
    (1, 1, 2, 0.5, 1, True, "clause (1)"),
    (1, 3, 2, 0.5, 1, False, "clause (2)"),
]

TRIEBEL_TABLE = [
    (2, 2, 2, 0.0, 1, True, "clause (3)"),        # r = p' = q: non-strict branch
    (2, 4, 2, 0.0, 1, False, "clause (2)"),       # r = p' < q: strict fails at equality
    (2, 4, 2, 0.1, 1, True, "clause (2)"),
    (1, 1, 1, 1.0, 1, True, "clause (3)"),        # boundary, non-strict
    (1, 1, 1, 0.9, 1, False, "clause (3)"),
    (2, 2, 1, 0.5, 1, False, "clause (1)"),       # r < p strict fails at equality
    (2, 2, 1, 0.51, 1, True, "clause (1)"),
    (1, 2, 2, 1.0, 1, True, "clause (3)"),
    (1, 4, 2, 0.5, 1, True, "clause (4)"),        # p <= r < p', q > r: non-strict
    (1, 4, 2, 0.49, 1, False, "clause (4)"),
    (4, 2, 2, 3.0, 1, False, "gate"),             # p > 2
    (2, 2, 8, 0.0, 1, False, "gate"),             # 1/p + 1/r < 1
    (2, 1, 2, 0.0, 1, True, "clause (3)"),
    (1, INF, INF, 0.0, 1, True, "clause (3)"),
    (1, INF, 4, 0.0, 1, False, "clause (4)"),
    (1, INF, 4, 0.25, 1, True, "clause (4)"),     # non-strict boundary with q = inf
    (2, 2, 2, 0.0, 2, True, "clause (3)"),
]


def test_besov_predicate_table():
    for p, q, r, s, d, expected, clause_part in BESOV_TABLE:
        t = IndexTuple(p, q, r, s, d)
        holds, clause = besov_embedding_decision(t)
        print(f"b24 {t.label():34s} -> {holds} [{clause}]")
        assert holds == expected, (t, clause)
        assert clause_part in clause, (t, clause)
        assert besov_embeds_fl(t) == expected


def test_triebel_predicate_table():
    for p, q, r, s, d, expected, clause_part in TRIEBEL_TABLE:
        t = IndexTuple(p, q, r, s, d)
        holds, clause = triebel_embedding_decision(t)
        print(f"t25 {t.label():34s} -> {holds} [{clause}]")
        assert holds == expected, (t, clause)
        assert clause_part in clause, (t, clause)
        assert triebel_embeds_fl(t) == expected


def test_table_is_large_enough():
    assert len(BESOV_TABLE) + len(TRIEBEL_TABLE) >= 30


def test_triebel_predicate_rejects_p_inf():
    with pytest.raises(ValueError):
        triebel_embedding_decision(IndexTuple(INF, 2, 2, 0.0, 1))


def test_exactness_of_boundary_arithmetic():
    # 0.1 + 0.2 style pitfalls: thirds decided exactly via rational arithmetic
    t = IndexTuple(1.5, 1.0, 3.0, 1.0, 1)  # gap = 1/3 + 2/3 - 1 = 0 exactly
    holds, clause = besov_embedding_decision(t)
    assert holds and "clause (1)" in clause
    t2 = IndexTuple(1.5, 1.0, 3.0, -1e-16, 1)
    assert not besov_embeds_fl(t2)


# ---------------------------------------------------------------------------
# operator-order admissibility


def test_admissibility_thresholds():
    t = IndexTuple(2, 2, 2, 0.0, 1)
    # threshold -kappa|1/2 - 1/2| = 0
    assert fio_besov_to_fl_admissible(t, 0.0, 1)
    assert not fio_besov_to_fl_admissible(t, 0.01, 1)
    t1 = IndexTuple(1, 1, 1, 1.0, 1)
    # r = 1: threshold -kappa/2
    assert fio_besov_to_fl_admissible(t1, -0.5, 1)
    assert not fio_besov_to_fl_admissible(t1, -0.49, 1)
    assert fio_besov_to_fl_admissible(t1, -1.0, 2)
    assert not fio_besov_to_fl_admissible(t1, -0.99, 2)
    # embedding failure blocks admissibility regardless of order
    t_bad = IndexTuple(3, 2, 2, 5.0, 1)
    assert not fio_besov_to_fl_admissible(t_bad, -10.0, 1)


def test_admissibility_triebel_and_decision_text():
    t = IndexTuple(2, 2, 2, 0.0, 1)
    assert fio_triebel_to_fl_admissible(t, 0.0, 1)
    assert not fio_triebel_to_fl_admissible(t, 1e-9, 1)
    ok, clause = admissibility_decision(IndexTuple(1, 1, 1, 1.0, 1), -0.5, 1, "besov")
    assert ok and "m <= -kappa" in clause
    ok2, clause2 = admissibility_decision(IndexTuple(1, 1, 1, 1.0, 1), -0.4, 1, "besov")
    assert not ok2 and "order fails" in clause2


def test_admissibility_validates_r():
    t = IndexTuple(1, 1, 0.5, 2.0, 1)
    with pytest.raises(ValueError):
        fio_besov_to_fl_admissible(t, -1.0, 1)
    with pytest.raises(ValueError):
        fio_triebel_to_fl_admissible(t, -1.0, 1)
