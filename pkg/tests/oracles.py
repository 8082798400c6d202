"""Independent brute-force oracles.

These deliberately avoid the package's integer forms and vectorised slices: they
loop over points in reverse order, substitute ``Fraction(a_i, q)`` term by term and
round with Fraction arithmetic.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def _value(terms, point):
    total = Fraction(0)
    for coeff, exps in terms:
        v = Fraction(coeff)
        for xi, ei in zip(point, exps):
            v *= xi**ei
        total += v
    return total


def _nearest_int_distance(x: Fraction) -> Fraction:
    return abs(x - math.floor(x + Fraction(1, 2)))


def brute_force_counts(chart, Q, delta):
    """Unweighted count, on-manifold count and domain size, by naive rational arithmetic."""
    delta = Fraction(delta)
    comps = [p.terms for p in chart.components]
    counted = on = domain = 0
    for q in range(Q, 0, -1):
        axes = []
        for x0 in chart.x0:
            lo, hi = x0 - chart.epsilon0, x0 + chart.epsilon0
            # scan a generous integer window and keep what lands in the box
            axes.append([a for a in range(-2 * q - 2 + math.floor(q * x0), 2 * q + 3 + math.ceil(q * x0))
                         if lo <= Fraction(a, q) <= hi])
        for a in itertools.product(*(reversed(ax) for ax in axes)):
            point = [Fraction(ai, q) for ai in a]
            dists = [_nearest_int_distance(q * _value(t, point)) for t in comps]
            domain += 1
            if all(d <= delta for d in dists):
                counted += 1
            if all(d == 0 for d in dists):
                on += 1
    return counted, on, domain
