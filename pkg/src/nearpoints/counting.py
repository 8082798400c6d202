"""Exact enumeration of weighted counts of rational points near a chart.

For each ``q <= Q`` and each integer vector ``a`` with ``a/q`` in the closed chart
box, ``q f_r(a/q)`` is written as ``N / M`` with integers

    M = D_r q^(d_r - 1),    N = sum_e (D_r c_e) a^e q^(d_r - |e|),

where ``D_r`` clears the coefficient denominators of ``f_r`` and ``d_r`` is its
degree.  ``||N/M|| <= delta`` is then an integer comparison.  Slices (one per
``q``) are vectorised with numpy and fall back to Python integers whenever the
int64 range could be exceeded.

Weighted sums are floating point.  Each slice contributes an exactly rounded
(hi, lo) pair from :func:`math.fsum`; slices are reduced in ascending ``q``
order, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .chart import BumpWeight, ChartSpec, PolynomialMap
from .kernels import selberg_build, selberg_eval

INT64_SAFE = 2**62
BIGINT_BITS_CAP = 1 << 20


class CountError(ValueError):
    pass


class CountOverflow(CountError):
    pass


@dataclass(frozen=True)
class CountResult:
    Q: int
    delta: Fraction
    R: int
    n_weighted: float
    n0_weighted: float
    n_unweighted: int
    n0_unweighted: int
    n_on_manifold: int

    @property
    def main_term(self) -> float:
        return float((2 * self.delta) ** self.R) * self.n0_weighted

    @property
    def error(self) -> float:
        return abs(self.n_weighted - self.main_term)

    @property
    def relative_error(self) -> float:
        return self.error / self.main_term if self.main_term else math.inf


@dataclass(frozen=True)
class EnumerationPlan:
    """Per-``q`` integer boxes ``[ceil(q(x0 - eps0)), floor(q(x0 + eps0))]``."""

    x0: tuple[Fraction, ...]
    epsilon0: Fraction
    Q: int

    @classmethod
    def for_chart(cls, c: ChartSpec, Q: int) -> "EnumerationPlan":
        return cls(tuple(c.x0), c.epsilon0, Q)

    @property
    def q_range(self) -> range:
        return range(1, self.Q + 1)

    def axis_ranges(self, q: int) -> list[tuple[int, int]]:
        return [(math.ceil(q * (x - self.epsilon0)), math.floor(q * (x + self.epsilon0))) for x in self.x0]

    def slice_size(self, q: int) -> int:
        return math.prod(max(hi - lo + 1, 0) for lo, hi in self.axis_ranges(q))


def enumerate_slice(c: ChartSpec, q: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors ``a`` with ``a/q`` in the closed chart box, lexicographically."""
    if q < 1:
        raise CountError("q must be >= 1")
    ranges = EnumerationPlan(tuple(c.x0), c.epsilon0, q).axis_ranges(q)
    return itertools.product(*(range(lo, hi + 1) for lo, hi in ranges))


@dataclass(frozen=True)
class _IntegerForm:
    denom: int  # D: lcm of coefficient denominators
    degree: int  # d >= 1
    terms: tuple[tuple[int, tuple[int, ...]], ...]  # (D * c, exponent)

    @classmethod
    def of(cls, p: PolynomialMap) -> "_IntegerForm":
        D = math.lcm(*(c.denominator for c, _ in p.terms)) if p.terms else 1
        d = max(p.degree, 1)
        return cls(D, d, tuple((int(c * D), e) for c, e in p.terms))

    def modulus(self, q: int) -> int:
        return self.denom * q ** (self.degree - 1)

    def bound(self, q: int, amax: Sequence[int]) -> int:
        total = 0
        for coef, e in self.terms:
            mono = abs(coef) * q ** (self.degree - sum(e))
            for m, k in zip(amax, e):
                mono *= m**k
            total += mono
        return total


def _axis_powers(axes: list[np.ndarray], degree: int, dtype) -> list[list[np.ndarray]]:
    """``powers[k][e]`` is axis ``k`` raised to ``e``, shaped to broadcast over the slice."""
    n = len(axes)
    out = []
    for k, ax in enumerate(axes):
        shape = [1] * n
        shape[k] = -1
        base = ax.astype(dtype).reshape(shape)
        pw = [np.ones_like(base)]
        for _ in range(degree):
            pw.append(pw[-1] * base)
        out.append(pw)
    return out


def _numerators(form: _IntegerForm, q: int, powers, shape, dtype) -> np.ndarray:
    acc = np.zeros(shape, dtype=dtype)
    for coef, e in form.terms:
        term = coef * q ** (form.degree - sum(e))
        for k, ek in enumerate(e):
            if ek:
                term = term * powers[k][ek]
        acc = acc + term
    return acc


@dataclass(frozen=True)
class SliceTotals:
    q: int
    n_domain: int
    n_counted: int
    n_on_manifold: int
    weighted: tuple[float, float]
    weighted0: tuple[float, float]


def _fsum_pair(values: np.ndarray) -> tuple[float, float]:
    vals = values.ravel().tolist()
    hi = math.fsum(vals)
    vals.append(-hi)
    return hi, math.fsum(vals)


def _grid_weights(w: BumpWeight | None, axes: list[np.ndarray], q: int, shape) -> np.ndarray:
    if w is None:
        return np.ones(shape)
    n = len(axes)
    pts = np.empty((n,) + tuple(shape))
    for k, ax in enumerate(axes):
        s = [1] * n
        s[k] = -1
        pts[k] = (ax.astype(float) / q).reshape(s)
    return w(pts)


def count_slice(c: ChartSpec, w: BumpWeight | None, q: int, delta: Fraction, forms=None) -> SliceTotals:
    forms = forms or [_IntegerForm.of(p) for p in c.components]
    plan = EnumerationPlan(tuple(c.x0), c.epsilon0, q)
    ranges = plan.axis_ranges(q)
    if any(hi < lo for lo, hi in ranges):
        return SliceTotals(q, 0, 0, 0, (0.0, 0.0), (0.0, 0.0))
    axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in ranges]
    shape = tuple(len(a) for a in axes)
    # at least 1, so the coefficients themselves are sized even when a = 0 is the only point
    amax = [max(abs(lo), abs(hi), 1) for lo, hi in ranges]
    dn, dd = delta.numerator, delta.denominator

    counted = np.ones(shape, dtype=bool)
    on = np.ones(shape, dtype=bool)
    for form in forms:
        M = form.modulus(q)
        bound = form.bound(q, amax)
        if bound.bit_length() > BIGINT_BITS_CAP:
            raise CountOverflow(f"numerators need {bound.bit_length()} bits at q = {q}")
        small = bound < INT64_SAFE and max(dd, dn, 1) * M < INT64_SAFE // 4
        dtype = np.int64 if small else object
        powers = _axis_powers(axes, form.degree, dtype)
        N = _numerators(form, q, powers, shape, dtype)
        r = N % M
        dist = np.minimum(r, M - r)
        counted &= np.asarray(dd * dist <= dn * M, dtype=bool)
        on &= np.asarray(dist == 0, dtype=bool)

    weights = _grid_weights(w, axes, q, shape)
    return SliceTotals(
        q,
        int(np.prod(shape)),
        int(np.count_nonzero(counted)),
        int(np.count_nonzero(on)),
        _fsum_pair(weights[counted]),
        _fsum_pair(weights),
    )


def _reduce_pairs(pairs) -> float:
    parts = []
    for hi, lo in pairs:
        parts.extend((hi, lo))
    return math.fsum(parts)


def _check_delta(delta) -> Fraction:
    if isinstance(delta, float):
        raise CountError("delta must be an exact rational (Fraction, int or 'p/q')")
    delta = Fraction(delta)
    if not 0 <= delta <= Fraction(1, 2):
        raise CountError("delta must lie in [0, 1/2]")
    return delta


def count(c: ChartSpec, w: BumpWeight | None, Q: int, delta, workers: int = 1) -> CountResult:
    """Weighted and unweighted counts of ``a/q`` (``q <= Q``) with ``||q f_r(a/q)|| <= delta``."""
    if Q < 1:
        raise CountError("Q must be >= 1")
    delta = _check_delta(delta)
    forms = [_IntegerForm.of(p) for p in c.components]
    qs = range(1, Q + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            slices = list(pool.map(lambda q: count_slice(c, w, q, delta, forms), qs))
    else:
        slices = [count_slice(c, w, q, delta, forms) for q in qs]
    slices.sort(key=lambda s: s.q)
    return CountResult(
        Q,
        delta,
        c.R,
        _reduce_pairs(s.weighted for s in slices),
        _reduce_pairs(s.weighted0 for s in slices),
        sum(s.n_counted for s in slices),
        sum(s.n_domain for s in slices),
        sum(s.n_on_manifold for s in slices),
    )


def _n0_slice(c: ChartSpec, w: BumpWeight | None, q: int) -> tuple[int, tuple[float, float]]:
    ranges = EnumerationPlan(tuple(c.x0), c.epsilon0, q).axis_ranges(q)
    n_dom = math.prod(max(hi - lo + 1, 0) for lo, hi in ranges)
    if n_dom == 0:
        return 0, (0.0, 0.0)
    if w is None:
        return n_dom, (float(n_dom), 0.0)
    # only the part of the box inside the bump's support carries weight
    sub = []
    for (lo, hi), cen in zip(ranges, w.center):
        slo = max(lo, math.ceil(q * (cen - w.radius)))
        shi = min(hi, math.floor(q * (cen + w.radius)))
        if shi < slo:
            return n_dom, (0.0, 0.0)
        sub.append(np.arange(slo, shi + 1, dtype=np.int64))
    shape = tuple(len(a) for a in sub)
    return n_dom, _fsum_pair(_grid_weights(w, sub, q, shape))


def count_N0(c: ChartSpec, w: BumpWeight | None, Q: int, workers: int = 1) -> tuple[float, int]:
    """``(sum of omega(a/q), number of points)`` over the chart box for ``q <= Q``."""
    if Q < 1:
        raise CountError("Q must be >= 1")
    qs = range(1, Q + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda q: _n0_slice(c, w, q), qs))
    else:
        parts = [_n0_slice(c, w, q) for q in qs]
    return _reduce_pairs(p[1] for p in parts), sum(p[0] for p in parts)


def selberg_sandwich_sum(c: ChartSpec, w: BumpWeight | None, Q: int, delta, J: int) -> tuple[float, float]:
    """``(sum omega S^-(q f(a/q)), sum omega S^+(q f(a/q)))`` for a codimension-one chart."""
    if c.R != 1:
        raise CountError("the sandwich sum is only defined for R = 1")
    delta = _check_delta(delta)
    if delta == 0:
        raise CountError("the Selberg pair needs delta > 0")
    pair = selberg_build(J, delta)
    form = _IntegerForm.of(c.components[0])
    lower, upper = [], []
    for q in range(1, Q + 1):
        M = form.modulus(q)
        for chunk in _chunks(enumerate_slice(c, q), 20_000):
            a = np.array(chunk, dtype=np.int64).T
            x = a.astype(float) / q
            om = np.ones(a.shape[1]) if w is None else w(x)
            keep = om > 0
            if not np.any(keep):
                continue
            fracs = []
            for col in a[:, keep].T:
                num = 0
                for coef, e in form.terms:
                    mono = coef * q ** (form.degree - sum(e))
                    for ai, ei in zip(col.tolist(), e):
                        mono *= ai**ei
                    num += mono
                fracs.append((num % M) / M)
            om = om[keep]
            lower.extend((om * selberg_eval(pair, "-", np.array(fracs))).tolist())
            upper.extend((om * selberg_eval(pair, "+", np.array(fracs))).tolist())
    return math.fsum(lower), math.fsum(upper)


def _chunks(it, size):
    buf = []
    for item in it:
        buf.append(item)
        if len(buf) == size:
            yield buf
            buf = []
    if buf:
        yield buf
