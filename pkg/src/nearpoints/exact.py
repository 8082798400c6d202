"""Exact linear algebra and univariate root counting over the rationals."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence


def _integer_rows(matrix) -> tuple[list[list[int]], Fraction]:
    """Clear denominators row by row; returns the integer matrix and the det scale."""
    rows = []
    scale = Fraction(1)
    for row in matrix:
        row = [Fraction(v) for v in row]
        m = lcm(*(v.denominator for v in row)) if row else 1
        rows.append([int(v * m) for v in row])
        scale /= m
    return rows, scale


def _as_int(v) -> int:
    v = Fraction(v)
    if v.denominator != 1:
        raise ValueError(f"bareiss needs integer entries, got {v}; use exact_det / exact_rank")
    return v.numerator


def bareiss(matrix) -> tuple[int, int]:
    """Fraction-free elimination of an integer matrix.

    Returns ``(rank, det)``; ``det`` is 0 unless the matrix is square and full rank.
    """
    a = [[_as_int(v) for v in r] for r in matrix]
    n_rows = len(a)
    n_cols = len(a[0]) if a else 0
    prev = 1
    sign = 1
    rank = 0
    col = 0
    while rank < n_rows and col < n_cols:
        pivot = next((i for i in range(rank, n_rows) if a[i][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        if pivot != rank:
            a[rank], a[pivot] = a[pivot], a[rank]
            sign = -sign
        p = a[rank][col]
        for i in range(rank + 1, n_rows):
            for j in range(col + 1, n_cols):
                a[i][j] = (a[i][j] * p - a[i][col] * a[rank][j]) // prev
            a[i][col] = 0
        prev = p
        rank += 1
        col += 1
    det = 0
    if n_rows == n_cols and rank == n_rows:
        det = sign * (a[-1][-1] if n_rows else 1)
    return rank, det


def exact_det(matrix) -> Fraction:
    if len(matrix) == 0:
        return Fraction(1)
    rows, scale = _integer_rows(matrix)
    _, det = bareiss(rows)
    return det * scale


def exact_rank(matrix) -> int:
    rows, _ = _integer_rows(matrix)
    return bareiss(rows)[0]


def minor(matrix, i: int):
    """Principal submatrix with row and column ``i`` removed (0-based)."""
    n = len(matrix)
    return [[matrix[r][c] for c in range(n) if c != i] for r in range(n) if r != i]


# --- univariate polynomials as coefficient lists, lowest degree first ---------

def poly_trim(p: list[Fraction]) -> list[Fraction]:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_eval(p: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_deriv(p: Sequence[Fraction]) -> list[Fraction]:
    return poly_trim([k * p[k] for k in range(1, len(p))])


def poly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]):
    a = poly_trim(a)
    b = poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    rem = list(a)
    while len(rem) >= len(b) and rem:
        shift = len(rem) - len(b)
        f = rem[-1] / b[-1]
        quot[shift] = f
        for k, bk in enumerate(b):
            rem[k + shift] -= f * bk
        rem = poly_trim(rem)
    return poly_trim(quot), rem


def poly_gcd(a, b) -> list[Fraction]:
    a, b = poly_trim(a), poly_trim(b)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    return [c / a[-1] for c in a] if a else a


def interpolate(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> list[Fraction]:
    """Exact coefficients of the interpolating polynomial (Newton form, expanded)."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    out = [Fraction(0)] * n
    for k in range(n - 1, -1, -1):
        # out = out * (x - xs[k]) + coef[k]
        shifted = [Fraction(0)] + out[:-1]
        out = [s - xs[k] * o for s, o in zip(shifted, out)]
        out[0] += coef[k]
    return poly_trim(out)


def _sturm_chain(p):
    chain = [p, poly_deriv(p)]
    while chain[-1]:
        r = poly_divmod(chain[-2], chain[-1])[1]
        chain.append([-c for c in r])
    return [c for c in chain if c]


def _variations(chain, x: Fraction) -> int:
    signs = [v for v in (poly_eval(c, x) for c in chain) if v != 0]
    return sum(1 for u, v in zip(signs, signs[1:]) if (u > 0) != (v > 0))


def _squarefree(p):
    g = poly_gcd(p, poly_deriv(p))
    return poly_divmod(p, g)[0] if len(g) > 1 else p


def count_roots(p: Sequence[Fraction], lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots of ``p`` in the closed interval ``[lo, hi]``.

    Uses the Sturm sequence of the square-free part; ``p`` must not be zero.
    """
    p = poly_trim(p)
    if not p:
        raise ValueError("zero polynomial has infinitely many roots")
    if len(p) == 1:
        return 0
    sf = _squarefree(p)
    chain = _sturm_chain(sf)
    # Sturm counts roots in (lo, hi]
    return _variations(chain, lo) - _variations(chain, hi) + (poly_eval(sf, lo) == 0)


def isolate_roots(p: Sequence[Fraction], lo: Fraction, hi: Fraction, width: Fraction = Fraction(1, 2**50)):
    """Disjoint intervals ``(a, b]`` each holding exactly one root of ``p`` in ``[lo, hi]``.

    Roots hit exactly are returned as degenerate intervals ``(r, r)``.
    """
    p = poly_trim(p)
    if len(p) <= 1:
        return []
    sf = _squarefree(p)
    chain = _sturm_chain(sf)
    lo, hi = Fraction(lo), Fraction(hi)
    out = [(lo, lo)] if poly_eval(sf, lo) == 0 else []
    stack = [(lo, hi, _variations(chain, lo), _variations(chain, hi))]
    while stack:
        a, b, va, vb = stack.pop()
        k = va - vb
        if k == 0:
            continue
        if k == 1 and (b - a <= width or poly_eval(sf, b) == 0):
            out.append((b, b) if poly_eval(sf, b) == 0 else (a, b))
            continue
        m = (a + b) / 2
        vm = _variations(chain, m)
        stack.append((m, b, vm, vb))
        stack.append((a, m, va, vm))
    return sorted(out)
