import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearpoints import curvature as cv
from nearpoints.chart import ChartSpec, PolynomialMap, weighted_hessian
from nearpoints.exact import bareiss, count_roots, exact_det, exact_rank, isolate_roots
from nearpoints.fixtures import chart_a, chart_b, chart_c

small = st.integers(-4, 4)


def _quadratic_chart(coeffs, R):
    """n = 3 chart whose components are quadratic forms with the given integer coefficients."""
    monos = [(2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1)]
    comps = []
    for r in range(R):
        comps.append(PolynomialMap.from_terms(3, zip(coeffs[6 * r:6 * r + 6], monos)))
    return ChartSpec(3, R, (Fraction(0),) * 3, Fraction(1, 10), tuple(comps))


def _leibniz_det(m):
    n = len(m)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        sign = (-1) ** sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = Fraction(1)
        for i, p in enumerate(perm):
            prod *= m[i][p]
        total += sign * prod
    return total


# --- exact helpers -----------------------------------------------------------

@given(st.lists(st.lists(st.fractions(-5, 5, max_denominator=7), min_size=4, max_size=4), min_size=4, max_size=4))
def test_exact_det_and_rank_match_leibniz(m):
    assert exact_det(m) == _leibniz_det(m)
    assert exact_rank(m) == np.linalg.matrix_rank(np.array(m, dtype=float), tol=1e-9)


def test_bareiss_integer_only():
    assert bareiss([[2, 1], [4, 3]]) == (2, 2)
    assert bareiss([[0, 0], [0, 5]]) == (1, 0)
    with pytest.raises(ValueError):
        bareiss([[Fraction(1, 2)]])


def test_exact_rank_examples():
    assert exact_rank([[2, 0, 0], [0, 0, 0], [0, 0, 0]]) == 1
    assert exact_rank([[1, 2], [2, 4]]) == 1
    assert exact_det([[0, 1], [1, 0]]) == -1


def test_root_counting_and_isolation():
    p = [Fraction(0), Fraction(-2), Fraction(0), Fraction(8)]  # 8s^3 - 2s
    assert count_roots(p, Fraction(-1), Fraction(1)) == 3
    roots = isolate_roots(p, Fraction(-1), Fraction(1))
    assert [a for a, b in roots] == [Fraction(-1, 2), Fraction(0), Fraction(1, 2)]
    q = [Fraction(-2), Fraction(0), Fraction(1)]  # s^2 - 2
    assert count_roots(q, Fraction(-1), Fraction(1)) == 0
    assert count_roots(q, Fraction(-2), Fraction(2)) == 2
    (lo, hi), = isolate_roots(q, Fraction(0), Fraction(2))
    assert lo < Fraction(2) ** Fraction(1, 2) <= hi and hi - lo <= Fraction(1, 2**50)


# --- principal minors and cover ----------------------------------------------

def test_principal_minor_examples():
    c = chart_a()
    assert cv.principal_minor(c, (0, 1), 3) == -1
    assert cv.principal_minor(c, (0, 1), 1) == 0
    assert cv.principal_minor(c, (1, 0), 1) == 4
    with pytest.raises(IndexError):
        cv.principal_minor(c, (1, 0), 4)
    with pytest.raises(ValueError):
        cv.principal_minor(c, (0, 0), 1)


def test_cover_examples():
    cov = cv.cover_assignment(chart_a(), 9)
    by_t = {s.t: s for s in cov.samples}
    assert by_t[(Fraction(0), Fraction(1))].nu == 3
    assert by_t[(Fraction(0), Fraction(1))].margin == 1
    assert by_t[(Fraction(1), Fraction(0))].nu == 1
    assert by_t[(Fraction(1), Fraction(0))].margin == 4
    assert cov.min_margin > 0
    b = cv.cover_assignment(chart_b(), 9)
    assert [(s.nu, s.margin) for s in b.samples] == [(1, 1.0)]


def test_cover_fails_without_principal_minor():
    # H = [[0, 1], [1, 0]] has full rank but both 1x1 principal minors vanish
    c = ChartSpec(2, 1, (Fraction(0),) * 2, Fraction(1, 10), (PolynomialMap.from_terms(2, [(1, (1, 1))]),))
    assert cv.check_condition_rank(c).verdict == cv.HOLDS
    with pytest.raises(cv.CoverError):
        cv.cover_assignment(c)
    rep = cv.curvature_report(c)
    assert rep.cover is None and "vanish" in rep.cover_error


def test_hessian_box_bounds_examples():
    a = cv.hessian_box_bounds(chart_a(), 3, 0, [(0, 1)])
    assert a.raw_min == a.raw_max == 1.0
    assert a.c1 == pytest.approx(0.9) and a.c2 == pytest.approx(1.1)
    b = cv.hessian_box_bounds(chart_b(), 1, Fraction(1, 10), [(1,)])
    assert b.raw_min == b.raw_max == 1.0 and b.valid
    # the bound is needed on the directions the cover assigns to nu = 3
    tset = [s.t for s in cv.cover_assignment(chart_a(), 17).samples if s.nu == 3]
    assert tset
    g = cv.hessian_box_bounds(chart_a(), 3, Fraction(1, 10), tset)
    assert g.valid and g.c1 > 0
    # theta_3 = 4 t1^2 - t2^2 vanishes at t = (1/2, 1), outside that set
    assert not cv.hessian_box_bounds(chart_a(), 3, Fraction(1, 10), [(Fraction(1, 2), 1)]).valid
    with pytest.raises(ValueError):
        cv.hessian_box_bounds(chart_a(), 3, Fraction(1, 2), [(0, 1)])


# --- conditions ----------------------------------------------------------------

def test_sphere_samples_one_per_antipodal_pair():
    pts = cv.sphere_samples(2, 9)
    assert len(pts) == 9 + 7
    seen = set(pts)
    assert len(seen) == len(pts)
    for t in pts:
        assert max(abs(v) for v in t) == 1
        assert tuple(-v for v in t) not in seen


def test_chart_a_separates_conditions():
    full = cv.check_condition_full(chart_a(), 9)
    assert full.verdict == cv.FAILS and full.exact
    assert full.witness == (Fraction(0), Fraction(1))
    assert full.refined_minimum <= 1e-9
    assert set(full.witnesses) == {(Fraction(-1, 2), Fraction(1)), (Fraction(0), Fraction(1)),
                                   (Fraction(1, 2), Fraction(1))}
    rank = cv.check_condition_rank(chart_a(), 9)
    assert rank.verdict == cv.HOLDS
    assert rank.grid_minimum >= 0.5


def test_chart_b_and_c():
    assert cv.check_condition_full(chart_b()).verdict == cv.HOLDS
    assert cv.check_condition_rank(chart_b()).verdict == cv.HOLDS
    full = cv.check_condition_full(chart_c())
    rank = cv.check_condition_rank(chart_c())
    assert full.verdict == rank.verdict == cv.FAILS
    assert rank.exact
    t = rank.witness
    assert exact_rank(weighted_hessian(chart_c(), t, (0, 0, 0)).tolist()) <= 1


def test_report_serialises():
    rep = cv.curvature_report(chart_a())
    d = rep.to_dict()
    assert d["condition_full"]["witness"] == ["0", "1"]
    assert d["condition_full"]["verdict"] == "fails"
    assert float(d["min_sigma_nminus1"]) >= 0.5
    assert rep.min_abs_det >= 0 and rep.min_sigma_nminus1 >= 0


@settings(max_examples=25, deadline=None)
@given(st.lists(small, min_size=12, max_size=12))
def test_full_implies_rank(coeffs):
    c = _quadratic_chart(coeffs, 2)
    full = cv.check_condition_full(c, 8)
    rank = cv.check_condition_rank(c, 8)
    if full.verdict == cv.HOLDS:
        assert rank.verdict == cv.HOLDS
    if full.verdict == cv.FAILS:
        # witnesses are exact roots, or midpoints of 2^-50 isolating intervals for irrational ones
        h = weighted_hessian(c, full.witness, (0, 0, 0))
        assert abs(float(exact_det(h.tolist()))) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.lists(small, min_size=12, max_size=12), st.sampled_from([Fraction(-1), Fraction(3), Fraction(-5, 2)]))
def test_verdicts_invariant_under_scaling(coeffs, a):
    base = _quadratic_chart(coeffs, 2)
    scaled = ChartSpec(3, 2, base.x0, base.epsilon0, tuple(
        PolynomialMap.from_terms(3, [(a * co, e) for co, e in p.terms]) if p.terms else p for p in base.components
    ))
    for check in (cv.check_condition_full, cv.check_condition_rank):
        assert check(base, 8).verdict == check(scaled, 8).verdict


@settings(max_examples=20, deadline=None)
@given(st.lists(small, min_size=12, max_size=12))
def test_numeric_det_matches_exact_on_grid(coeffs):
    c = _quadratic_chart(coeffs, 2)
    basis = cv.hessian_basis(c)
    for t in cv.sphere_samples(2, 9):
        h = cv.pencil(basis, t)
        exact = exact_det(h)
        num = np.linalg.det(np.array(h, dtype=float))
        scale = max(1.0, float(np.max(np.abs(np.array(h, dtype=float))))) ** 3
        assert abs(num - float(exact)) <= 1e-9 * max(abs(float(exact)), scale)
