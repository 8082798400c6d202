"""Reference charts used throughout the tests, the acceptance suite and the CLI."""

from __future__ import annotations

from fractions import Fraction

from .chart import ChartError, ChartSpec, PolynomialMap

EPS0 = Fraction(1, 10)


def _poly(n, *terms):
    return PolynomialMap.from_terms(n, terms)


def chart_a(epsilon0: Fraction = EPS0) -> ChartSpec:
    """n=3, R=2: f1 = |x|^2, f2 = (x1^2 - x2^2)/2.  Rank condition holds, full fails."""
    f1 = _poly(3, (1, (2, 0, 0)), (1, (0, 2, 0)), (1, (0, 0, 2)))
    f2 = _poly(3, ("1/2", (2, 0, 0)), ("-1/2", (0, 2, 0)))
    return ChartSpec(3, 2, (Fraction(0),) * 3, Fraction(epsilon0), (f1, f2))


def chart_b(epsilon0: Fraction = EPS0) -> ChartSpec:
    """n=3, R=1: f = |x|^2 / 2."""
    f = _poly(3, ("1/2", (2, 0, 0)), ("1/2", (0, 2, 0)), ("1/2", (0, 0, 2)))
    return ChartSpec(3, 1, (Fraction(0),) * 3, Fraction(epsilon0), (f,))


def chart_c(epsilon0: Fraction = EPS0) -> ChartSpec:
    """n=3, R=2: f1 = x1^2, f2 = x2^2.  Both curvature conditions fail."""
    f1 = _poly(3, (1, (2, 0, 0)))
    f2 = _poly(3, (1, (0, 2, 0)))
    return ChartSpec(3, 2, (Fraction(0),) * 3, Fraction(epsilon0), (f1, f2))


def linear_chart(epsilon0: Fraction = EPS0) -> ChartSpec:
    """n=3, R=1: f = x1 + 2 x2 - x3, a rational hyperplane (every point integral)."""
    f = _poly(3, (1, (1, 0, 0)), (2, (0, 1, 0)), (-1, (0, 0, 1)))
    return ChartSpec(3, 1, (Fraction(0),) * 3, Fraction(epsilon0), (f,))


BUILTIN_CHARTS = {"A": chart_a, "B": chart_b, "C": chart_c, "linear": linear_chart}


def builtin_chart(name: str, epsilon0: Fraction = EPS0) -> ChartSpec:
    try:
        return BUILTIN_CHARTS[name](Fraction(epsilon0))
    except KeyError:
        raise ChartError(f"unknown builtin chart {name!r}; choose from {sorted(BUILTIN_CHARTS)}") from None
