"""Oscillatory integrals ``int omega(x) e(lambda phi(x)) dx`` by tensor Gauss-Legendre.

Node counts grow with the frequency (``max(32, ceil(8 lambda width))`` per axis,
doubled per level) instead of adapting, so every number is reproducible.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._fit import loglog_slope
from .chart import BumpWeight, ChartSpec, PolynomialMap

RESOLUTION_LIMIT = 1e5
UNDERFLOW = 1e-30
NOISE_FLOOR = 1e-13  # relative to the L1 mass of the discretised integrand


class OscillatoryError(ValueError):
    pass


class ResolutionGuard(OscillatoryError):
    pass


class NotCriticalPoint(OscillatoryError):
    pass


class DegenerateHessian(OscillatoryError):
    pass


class DegenerateFit(OscillatoryError):
    pass


@dataclass(frozen=True)
class OscIntegrand:
    amplitude: BumpWeight
    phase: PolynomialMap
    lam: float
    box: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.phase.n_vars != self.amplitude.dim:
            raise OscillatoryError("phase and amplitude dimensions differ")
        if self.lam <= 0:
            raise OscillatoryError("lambda must be positive")
        if self.box is not None:
            for (lo, hi), (slo, shi) in zip(self.box, self.amplitude.support_box()):
                if slo < lo or shi > hi:
                    raise OscillatoryError("amplitude support exceeds the quadrature box")

    @property
    def dim(self) -> int:
        return self.amplitude.dim

    def quadrature_box(self) -> tuple[tuple[float, float], ...]:
        return tuple(self.box) if self.box is not None else tuple(self.amplitude.support_box())

    def with_lambda(self, lam: float) -> "OscIntegrand":
        return OscIntegrand(self.amplitude, self.phase, lam, self.box)

    def conjugate_phase(self) -> "OscIntegrand":
        neg = PolynomialMap.from_terms(self.phase.n_vars, [(-c, e) for c, e in self.phase.terms])
        return OscIntegrand(self.amplitude, neg, self.lam, self.box)


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    error_estimate: float
    evaluations: int
    mass: float = 0.0  # sum of |w_i omega(x_i)| at the reported level
    lam: float = 0.0


def _legendre_pair(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``P_n(x)`` and ``P_n'(x)`` by the three-term recurrence."""
    p0, p1 = np.ones_like(x), x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1], ascending.

    Small orders come from numpy; large ones from Tricomi's initial guesses polished
    by Newton steps, which stays O(n^2) time but O(n) memory.
    """
    if n <= 128:
        return np.polynomial.legendre.leggauss(n)
    m = (n + 1) // 2
    k = np.arange(1, m + 1, dtype=float)
    x = (1 - 1 / (8 * n**2) + 1 / (8 * n**3)) * np.cos(np.pi * (4 * k - 1) / (4 * n + 2))
    for _ in range(10):
        p, dp = _legendre_pair(n, x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    _, dp = _legendre_pair(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    if n % 2:
        x[-1] = 0.0
        nodes = np.concatenate((-x, x[-2::-1]))
        weights = np.concatenate((w, w[-2::-1]))
    else:
        nodes = np.concatenate((-x, x[::-1]))
        weights = np.concatenate((w, w[::-1]))
    return nodes, weights


def _nodes(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = gauss_legendre(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def node_count(lam: float, width: float, level: int) -> int:
    return max(32, math.ceil(8 * lam * width)) * 2 ** (level - 1)


def _tensor_quadrature(o: OscIntegrand, level: int) -> tuple[complex, float, int]:
    box = o.quadrature_box()
    axes = [_nodes(node_count(o.lam, hi - lo, level), lo, hi) for lo, hi in box]
    d = o.dim
    first_x, first_w = axes[0]
    if d == 1:
        pts = first_x[None, :]
        amp = o.amplitude(pts) * first_w
        val = np.sum(amp * np.exp(2j * np.pi * o.lam * o.phase(pts)))
        return complex(val), float(np.sum(np.abs(amp))), len(first_x)
    rest = list(np.meshgrid(*[a[0] for a in axes[1:]], indexing="ij"))
    rest_w = np.ones_like(rest[0])
    for k, (_, w) in enumerate(axes[1:]):
        shape = [1] * (d - 1)
        shape[k] = -1
        rest_w = rest_w * w.reshape(shape)
    total = 0.0 + 0.0j
    mass = 0.0
    for xi, wi in zip(first_x, first_w):
        pts = np.stack([np.full_like(rest[0], xi)] + rest)
        amp = o.amplitude(pts) * rest_w * wi
        total += complex(np.sum(amp * np.exp(2j * np.pi * o.lam * o.phase(pts))))
        mass += float(np.sum(np.abs(amp)))
    return total, mass, int(len(first_x) * rest[0].size)


def integrate(o: OscIntegrand, level: int = 1) -> IntegralResult:
    if level < 1:
        raise OscillatoryError("level must be >= 1")
    box = o.quadrature_box()
    diam = math.sqrt(sum((hi - lo) ** 2 for lo, hi in box))
    if o.lam * diam > RESOLUTION_LIMIT:
        raise ResolutionGuard(f"lambda * diameter = {o.lam * diam:g} exceeds {RESOLUTION_LIMIT:g}")
    v1, mass, n1 = _tensor_quadrature(o, level)
    v2, _, n2 = _tensor_quadrature(o, level + 1)
    return IntegralResult(v1, abs(v1 - v2), n1 + n2, mass, o.lam)


def signature(h) -> int:
    """Positive minus negative eigenvalue count of a symmetric matrix."""
    h = np.asarray(h, dtype=float)
    if not np.allclose(h, h.T, rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(h)))):
        raise OscillatoryError("matrix is not symmetric")
    ev = np.linalg.eigvalsh(h)
    scale = float(np.max(np.abs(h))) if h.size else 0.0
    if scale == 0 or np.any(np.abs(ev) < 1e-10 * scale):
        raise DegenerateHessian("matrix is (nearly) singular")
    return int(np.sum(ev > 0) - np.sum(ev < 0))


def stationary_main_term(o: OscIntegrand, v0: Sequence[float]) -> complex:
    """Leading stationary-phase term ``e(lam phi(v0) + sigma/8) Delta^{-1/2} lam^{-d/2} omega(v0)``."""
    v0 = np.asarray(v0, dtype=float)
    grad = np.array(o.phase.gradient(v0), dtype=float)
    if np.max(np.abs(grad)) > 1e-8:
        raise NotCriticalPoint(f"|grad phi(v0)| = {np.max(np.abs(grad)):g}")
    h = o.phase.hessian(v0).astype(float)
    sig = signature(h)
    delta = abs(float(np.linalg.det(h)))
    phase = o.lam * float(o.phase(v0)) + sig / 8
    return cmath.exp(2j * math.pi * phase) * delta**-0.5 * o.lam ** (-o.dim / 2) * float(o.amplitude(v0))


@dataclass
class DecayFit:
    slope: float
    intercept: float
    lambdas: list[float]
    values: list[float]
    dropped: list[tuple[float, str]] = field(default_factory=list)


def decay_fit(family: Callable[[float], IntegralResult], lambdas: Sequence[float]) -> DecayFit:
    """Slope of ``log |I(lambda)|`` against ``log lambda``.

    Points are dropped (and reported) when the value underflows, sits below the
    quadrature noise floor, or has an error estimate above 10% of its modulus.
    """
    if len(lambdas) < 4:
        raise DegenerateFit("need at least 4 lambda values")
    keep_l, keep_v, dropped = [], [], []
    for lam in lambdas:
        r = family(lam)
        a = abs(r.value)
        if a < UNDERFLOW:
            dropped.append((lam, "underflow"))
        elif r.mass and a < NOISE_FLOOR * r.mass:
            dropped.append((lam, "below quadrature noise floor"))
        elif r.error_estimate >= 0.1 * a:
            dropped.append((lam, "error estimate above 10%"))
        else:
            keep_l.append(lam)
            keep_v.append(a)
    if len(keep_l) < 2:
        raise DegenerateFit(f"only {len(keep_l)} usable points; dropped {dropped}")
    slope, icpt = loglog_slope(keep_l, keep_v)
    return DecayFit(slope, icpt, keep_l, keep_v, dropped)


@dataclass
class ProbeRow:
    lam: float
    result: IntegralResult
    main: complex | None


def stationary_probe(o: OscIntegrand, lambdas: Sequence[float], v0=None, level: int = 1) -> list[ProbeRow]:
    rows = []
    for lam in lambdas:
        oi = o.with_lambda(lam)
        main = stationary_main_term(oi, v0) if v0 is not None else None
        rows.append(ProbeRow(lam, integrate(oi, level), main))
    return rows


def deviation_fit(rows: Sequence[ProbeRow]) -> tuple[float, list[float]]:
    """Slope of the relative deviation ``|I - main| / |main|`` against lambda (log-log)."""
    devs = [abs(r.result.value - r.main) / abs(r.main) for r in rows]
    slope, _ = loglog_slope([r.lam for r in rows], devs)
    return slope, devs


def write_probe_csv(rows: Sequence[ProbeRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "re", "im", "abs", "error_estimate", "main_re", "main_im"])
        for r in rows:
            v = r.result.value
            m = r.main if r.main is not None else complex("nan+nanj")
            w.writerow([f"{r.lam:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}", f"{abs(v):.17g}",
                        f"{r.result.error_estimate:.17g}", f"{m.real:.17g}", f"{m.imag:.17g}"])


def standard_bump_1d() -> BumpWeight:
    return BumpWeight((Fraction(0),), Fraction(1))


def poisson_integral(c: ChartSpec, w: BumpWeight, q: int, j: Sequence[int], k: Sequence[int], level: int = 1) -> IntegralResult:
    """``I(q; j; k) = int omega(x) e(q (sum_r j_r f_r(x) - k.x)) dx``."""
    if len(j) != c.R or len(k) != c.n:
        raise OscillatoryError("j must have R entries and k must have n entries")
    terms = []
    for jr, f in zip(j, c.components):
        terms.extend((jr * coef, e) for coef, e in f.terms)
    for i, ki in enumerate(k):
        terms.append((-Fraction(ki), tuple(int(m == i) for m in range(c.n))))
    phase = PolynomialMap.from_terms(c.n, terms)
    return integrate(OscIntegrand(w, phase, float(q)), level)
