import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearpoints.chart import (
    BumpWeight,
    ChartError,
    ChartSpec,
    PolynomialMap,
    default_weight,
    eval_rational,
    parse_rational,
    weight_eval,
    weighted_hessian,
)
from nearpoints.fixtures import BUILTIN_CHARTS, builtin_chart, chart_a, chart_b

SUM_SQUARES = PolynomialMap.from_terms(3, [(1, (2, 0, 0)), (1, (0, 2, 0)), (1, (0, 0, 2))])
HALF_DIFF = PolynomialMap.from_terms(3, [("1/2", (2, 0, 0)), ("-1/2", (0, 2, 0))])

rationals = st.fractions(min_value=-3, max_value=3, max_denominator=50)
exponents = st.tuples(*[st.integers(0, 3)] * 3)
polys = st.lists(st.tuples(rationals, exponents), min_size=1, max_size=6).map(
    lambda ts: PolynomialMap.from_terms(3, ts)
)


def test_parse_rational():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational(-4) == -4
    with pytest.raises(ChartError):
        parse_rational("1/0")
    with pytest.raises(ChartError):
        parse_rational(0.5)
    with pytest.raises(ChartError):
        parse_rational(True)
    with pytest.raises(ChartError):
        parse_rational("one half")


def test_eval_rational_examples():
    assert eval_rational(SUM_SQUARES, (1, 2, 3), 10) == Fraction(7, 50)
    assert eval_rational(HALF_DIFF, (3, 1, 0), 4) == Fraction(1, 4)
    p = PolynomialMap.from_terms(3, [("5/7", (0, 0, 0)), (2, (1, 0, 0))])
    assert eval_rational(p, (0, 0, 0), 1) == Fraction(5, 7)


def test_eval_rational_rejects_bad_q():
    with pytest.raises(ChartError):
        SUM_SQUARES.eval_rational((1, 2, 3), 0)


def test_terms_are_canonical():
    p = PolynomialMap.from_terms(2, [(1, (1, 0)), ("-1", (1, 0)), (2, (0, 1)), (3, (0, 1))])
    assert p.terms == ((Fraction(5), (0, 1)),)
    with pytest.raises(ChartError):
        PolynomialMap(2, ((Fraction(1), (1, 0)), (Fraction(2), (1, 0))))
    with pytest.raises(ChartError):
        PolynomialMap(2, ((Fraction(0), (1, 0)),))


@given(polys, st.tuples(*[st.integers(-20, 20)] * 3), st.integers(1, 40))
def test_exact_matches_float_evaluation(p, a, q):
    exact = p.eval_rational(a, q)
    assert isinstance(exact, Fraction)
    approx = p(np.array(a, dtype=float) / q)
    assert math.isclose(float(exact), approx, rel_tol=1e-12, abs_tol=1e-12)
    assert p([Fraction(ai, q) for ai in a]) == exact


@settings(max_examples=50)
@given(polys, st.tuples(*[st.floats(-0.5, 0.5)] * 3))
def test_derivatives_match_finite_differences(p, x):
    x = np.array(x)
    h = 1e-5
    g = np.array(p.gradient(x))
    H = p.hessian(x)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        fd = (p(x + e) - p(x - e)) / (2 * h)
        assert abs(fd - g[k]) <= 1e-6 * max(1.0, abs(g[k]))
        gfd = (np.array(p.gradient(x + e)) - np.array(p.gradient(x - e))) / (2 * h)
        assert np.allclose(gfd, H[:, k], rtol=1e-6, atol=1e-6)


def test_weighted_hessian_examples():
    c = chart_a()
    assert np.array_equal(weighted_hessian(c, (1, 0), (0, 0, 0)), 2 * np.eye(3, dtype=int))
    assert np.array_equal(weighted_hessian(c, (0, 1), (0, 0, 0)), np.diag([1, -1, 0]))
    assert np.array_equal(weighted_hessian(c, (1, 1), (0, 0, 0)), np.diag([3, 1, 2]))


def test_weighted_hessian_dimension_errors():
    with pytest.raises(ChartError):
        weighted_hessian(chart_a(), (1, 0, 0), (0, 0, 0))
    with pytest.raises(ChartError):
        weighted_hessian(chart_a(), (1, 0), (0, 0))


@given(rationals, rationals, st.tuples(rationals, rationals), st.tuples(rationals, rationals),
       st.tuples(rationals, rationals, rationals))
def test_weighted_hessian_is_linear_in_t(alpha, beta, s, t, x):
    c = chart_a()
    combo = tuple(alpha * si + beta * ti for si, ti in zip(s, t))
    lhs = weighted_hessian(c, combo, x)
    rhs = alpha * weighted_hessian(c, s, x) + beta * weighted_hessian(c, t, x)
    assert all(a == b for a, b in zip(lhs.ravel(), rhs.ravel()))
    assert lhs.dtype == object


def test_chart_validation():
    p = SUM_SQUARES
    with pytest.raises(ChartError):
        ChartSpec(1, 1, (Fraction(0),), Fraction(1, 10), (PolynomialMap.from_terms(1, [(1, (2,))]),))
    with pytest.raises(ChartError):
        ChartSpec(3, 2, (Fraction(0),) * 3, Fraction(1, 10), (p,))
    with pytest.raises(ChartError):
        ChartSpec(3, 1, (Fraction(0),) * 3, Fraction(0), (p,))
    c = ChartSpec(3, 1, (Fraction(0),) * 3, Fraction(1, 10), (p,))
    assert c.M == 4
    assert c.box() == [(Fraction(-1, 10), Fraction(1, 10))] * 3


def test_chart_json_round_trip(tmp_path):
    c = chart_a()
    path = tmp_path / "chart.json"
    path.write_text(json.dumps(c.to_dict()))
    assert ChartSpec.load(path) == c
    doc = c.to_dict()
    doc["epsilon0"] = "1/0"
    with pytest.raises(ChartError):
        ChartSpec.from_dict(doc)
    del doc["epsilon0"]
    with pytest.raises(ChartError):
        ChartSpec.from_dict(doc)


def test_builtin_charts():
    for name in BUILTIN_CHARTS:
        c = builtin_chart(name)
        assert c.epsilon0 == Fraction(1, 10)
        assert all(p.n_vars == c.n for p in c.components)
    with pytest.raises(ChartError):
        builtin_chart("nope")


def test_bump_examples():
    w = BumpWeight((Fraction(0),) * 3, Fraction(1, 2), 2.0)
    assert w(np.zeros(3)) == pytest.approx(2.0 * math.exp(-1.0), rel=0, abs=1e-15)
    assert weight_eval(w, np.array([0.5, 0.0, 0.0])) == 0.0
    assert weight_eval(w, np.array([0.4, 0.4, 0.0])) == 0.0
    pts = np.zeros((3, 4))
    pts[0] = [0.0, 0.1, 0.49, 0.6]
    vals = w(pts)
    assert vals.shape == (4,)
    assert np.all(np.diff(vals) <= 0) and vals[-1] == 0.0


def test_bump_rejects_bad_params():
    with pytest.raises(ChartError):
        BumpWeight((Fraction(0),), Fraction(0))
    with pytest.raises(ChartError):
        BumpWeight((Fraction(0),), Fraction(1), -1.0)


@given(st.tuples(*[st.floats(-0.9, 0.9)] * 3))
def test_bump_gradient_matches_finite_differences(u):
    u = np.array(u)
    if np.linalg.norm(u) >= 0.9:
        u = u * 0.85 / np.linalg.norm(u)
    w = default_weight(chart_b())
    kappa = float(w.radius)
    x = u * kappa
    g = w.gradient(x)
    h = 1e-7 * kappa
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        fd = (w(x + e) - w(x - e)) / (2 * h)
        assert abs(fd - g[k]) <= 1e-6 * max(1.0, abs(g[k]))


def test_default_weight_support_inside_box():
    c = chart_a()
    w = default_weight(c)
    assert w.radius == c.epsilon0 / 2
    for (lo, hi), (blo, bhi) in zip(w.support_box(), c.box()):
        assert float(blo) < lo and hi < float(bhi)


def test_bump_dict_round_trip():
    w = BumpWeight((Fraction(1, 3), Fraction(-1, 7)), Fraction(1, 20), 1.5)
    assert BumpWeight.from_dict(w.to_dict()) == w
