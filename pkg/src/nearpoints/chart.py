"""Local graph charts with exact polynomial components and the bump weight.

A chart describes ``{(x, f_1(x), ..., f_R(x)) : |x - x0|_inf <= eps0}`` where each
``f_r`` is a polynomial in ``n`` variables with rational coefficients.  Keeping the
components polynomial lets the counting predicate ``||q f_r(a/q)|| <= delta`` be
decided in exact arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class ChartError(ValueError):
    """Malformed chart data (bad rationals, dimension mismatches)."""


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"`` strings or integers into a Fraction; rejects ``q = 0``."""
    if isinstance(value, bool):
        raise ChartError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ZeroDivisionError:
            raise ChartError(f"zero denominator in {value!r}") from None
        except ValueError:
            raise ChartError(f"not a rational: {value!r}") from None
    raise ChartError(f"rationals must be given as 'p/q' strings or integers, got {value!r}")


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _is_exact(values) -> bool:
    return all(isinstance(v, Rational) for v in values)


@dataclass(frozen=True)
class PolynomialMap:
    """Polynomial ``sum c * x^e`` with exact rational coefficients.

    ``terms`` is kept canonical: sorted by exponent, no duplicate exponents and no
    zero coefficients.  Build instances with :meth:`from_terms`.
    """

    n_vars: int
    terms: tuple[tuple[Fraction, tuple[int, ...]], ...]

    def __post_init__(self):
        if self.n_vars < 1:
            raise ChartError("n_vars must be positive")
        seen = set()
        for coeff, exps in self.terms:
            if len(exps) != self.n_vars or any(e < 0 for e in exps):
                raise ChartError(f"bad exponent tuple {exps} for {self.n_vars} variables")
            if coeff == 0:
                raise ChartError("zero coefficients are not stored")
            if exps in seen:
                raise ChartError(f"duplicate exponent {exps}")
            seen.add(exps)

    @classmethod
    def from_terms(cls, n_vars: int, terms: Iterable[tuple[object, Sequence[int]]]) -> "PolynomialMap":
        acc: dict[tuple[int, ...], Fraction] = {}
        for coeff, exps in terms:
            exps = tuple(int(e) for e in exps)
            c = coeff if isinstance(coeff, Fraction) else parse_rational(coeff)
            acc[exps] = acc.get(exps, Fraction(0)) + c
        canon = sorted(((c, e) for e, c in acc.items() if c != 0), key=lambda t: t[1])
        return cls(n_vars, tuple(canon))

    @classmethod
    def zero(cls, n_vars: int) -> "PolynomialMap":
        return cls(n_vars, ())

    @property
    def degree(self) -> int:
        return max((sum(e) for _, e in self.terms), default=0)

    def constant_term(self) -> Fraction:
        for c, e in self.terms:
            if not any(e):
                return c
        return Fraction(0)

    def derivative(self, k: int) -> "PolynomialMap":
        """Partial derivative with respect to variable ``k`` (0-based)."""
        out = []
        for c, e in self.terms:
            if e[k]:
                e2 = list(e)
                e2[k] -= 1
                out.append((c * e[k], e2))
        return PolynomialMap.from_terms(self.n_vars, out)

    def __call__(self, x):
        """Evaluate at a point; exact if ``x`` is rational, float otherwise.

        ``x`` may also be an array of shape ``(n_vars, ...)`` for vectorised
        float evaluation.
        """
        if not isinstance(x, np.ndarray) and _is_exact(x):
            total = Fraction(0)
            for c, e in self.terms:
                term = c
                for xi, ei in zip(x, e):
                    if ei:
                        term *= Fraction(xi) ** ei
                total += term
            return total
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.n_vars:
            raise ChartError(f"expected {self.n_vars} coordinates, got {x.shape[0]}")
        total = np.zeros(x.shape[1:], dtype=float)
        for c, e in self.terms:
            term = np.full(x.shape[1:], float(c))
            for xi, ei in zip(x, e):
                if ei:
                    term = term * xi**ei
            total = total + term
        return total if total.ndim else float(total)

    def eval_rational(self, a: Sequence[int], q: int) -> Fraction:
        """Exact value of ``p(a / q)``."""
        if q < 1:
            raise ChartError("denominator q must be >= 1")
        if len(a) != self.n_vars:
            raise ChartError(f"expected {self.n_vars} coordinates, got {len(a)}")
        d = max(self.degree, 0)
        num = 0
        for c, e in self.terms:
            mono = 1
            for ai, ei in zip(a, e):
                mono *= ai**ei
            num += c * mono * q ** (d - sum(e))
        return Fraction(num) / q**d

    def gradient(self, x):
        return [self.derivative(k)(x) for k in range(self.n_vars)]

    def hessian(self, x) -> np.ndarray:
        """Hessian at ``x``; object array of Fractions when ``x`` is rational."""
        n = self.n_vars
        exact = _is_exact(x)
        h = np.empty((n, n), dtype=object if exact else float)
        firsts = [self.derivative(i) for i in range(n)]
        for i in range(n):
            for j in range(i, n):
                h[i, j] = firsts[i].derivative(j)(x)
                h[j, i] = h[i, j]
        return h

    def to_json(self) -> list:
        return [{"coeff": format_rational(c), "exp": list(e)} for c, e in self.terms]

    @classmethod
    def from_json(cls, n_vars: int, data: list) -> "PolynomialMap":
        try:
            return cls.from_terms(n_vars, ((t["coeff"], t["exp"]) for t in data))
        except (KeyError, TypeError) as exc:
            raise ChartError(f"malformed term list: {exc}") from None


@dataclass(frozen=True)
class ChartSpec:
    n: int
    R: int
    x0: tuple[Fraction, ...]
    epsilon0: Fraction
    components: tuple[PolynomialMap, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ChartError("manifold dimension n must be >= 2")
        if self.R < 1:
            raise ChartError("codimension R must be >= 1")
        if len(self.x0) != self.n:
            raise ChartError("x0 must have n coordinates")
        if self.epsilon0 <= 0:
            raise ChartError("epsilon0 must be positive")
        if len(self.components) != self.R:
            raise ChartError(f"expected {self.R} components, got {len(self.components)}")
        if any(p.n_vars != self.n for p in self.components):
            raise ChartError("all components must have n_vars = n")

    @property
    def M(self) -> int:
        return self.n + self.R

    def box(self) -> list[tuple[Fraction, Fraction]]:
        return [(c - self.epsilon0, c + self.epsilon0) for c in self.x0]

    def weighted_component(self, t: Sequence) -> PolynomialMap:
        """The polynomial ``t_1 f_1 + ... + t_R f_R`` (exact ``t`` only)."""
        if len(t) != self.R:
            raise ChartError(f"t must have R = {self.R} entries")
        terms = []
        for tr, p in zip(t, self.components):
            terms.extend((Fraction(tr) * c, e) for c, e in p.terms)
        return PolynomialMap.from_terms(self.n, terms)

    @classmethod
    def from_dict(cls, data: dict) -> "ChartSpec":
        try:
            n, R = int(data["n"]), int(data["R"])
            x0 = tuple(parse_rational(v) for v in data["x0"])
            eps = parse_rational(data["epsilon0"])
            comps = tuple(PolynomialMap.from_json(n, c) for c in data["components"])
        except KeyError as exc:
            raise ChartError(f"missing chart field {exc}") from None
        return cls(n, R, x0, eps, comps)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "R": self.R,
            "x0": [format_rational(v) for v in self.x0],
            "epsilon0": format_rational(self.epsilon0),
            "components": [p.to_json() for p in self.components],
        }

    @classmethod
    def load(cls, path: str | Path) -> "ChartSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def weighted_hessian(c: ChartSpec, t: Sequence, x: Sequence) -> np.ndarray:
    """``sum_r t_r H_{f_r}(x)``; exact (object dtype) when ``t`` and ``x`` are rational."""
    if len(t) != c.R:
        raise ChartError(f"t has {len(t)} entries, chart has R = {c.R}")
    if len(x) != c.n:
        raise ChartError(f"x has {len(x)} entries, chart has n = {c.n}")
    exact = _is_exact(t) and _is_exact(x)
    n = c.n
    h = np.zeros((n, n), dtype=object if exact else float)
    if exact:
        h[:, :] = Fraction(0)
    for tr, p in zip(t, c.components):
        if tr == 0:
            continue
        hp = p.hessian(x)
        h = h + (Fraction(tr) if exact else float(tr)) * hp
    # entries were computed on the upper triangle and mirrored, so h is symmetric
    return h


@dataclass(frozen=True)
class BumpWeight:
    """Radial mollifier ``A * exp(-1 / (1 - |(x - c)/kappa|^2))`` inside the ball."""

    center: tuple[Fraction, ...]
    radius: Fraction
    amplitude: float = 1.0
    _center_f: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.radius <= 0:
            raise ChartError("bump radius must be positive")
        if self.amplitude <= 0:
            raise ChartError("bump amplitude must be positive")
        object.__setattr__(self, "_center_f", np.array([float(v) for v in self.center]))

    @property
    def dim(self) -> int:
        return len(self.center)

    def __call__(self, x) -> float | np.ndarray:
        """Evaluate at ``x`` of shape ``(d,)`` or ``(d, ...)``."""
        x = np.asarray(x, dtype=float)
        u = (x - self._center_f.reshape((-1,) + (1,) * (x.ndim - 1))) / float(self.radius)
        s = np.sum(u * u, axis=0)
        inside = s < 1.0
        out = np.zeros_like(s)
        out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - s[inside]))
        return out if out.ndim else float(out)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        kappa = float(self.radius)
        u = (x - self._center_f) / kappa
        s = float(u @ u)
        if s >= 1.0:
            return np.zeros_like(x)
        return self(x) * (-2.0 * u / kappa) / (1.0 - s) ** 2

    def support_box(self) -> list[tuple[float, float]]:
        k = float(self.radius)
        return [(c - k, c + k) for c in self._center_f]

    @classmethod
    def from_dict(cls, data: dict) -> "BumpWeight":
        try:
            center = tuple(parse_rational(v) for v in data["center"])
            radius = parse_rational(data["radius"])
        except KeyError as exc:
            raise ChartError(f"missing weight field {exc}") from None
        return cls(center, radius, float(data.get("amplitude", 1.0)))

    def to_dict(self) -> dict:
        return {
            "center": [format_rational(v) for v in self.center],
            "radius": format_rational(self.radius),
            "amplitude": self.amplitude,
        }


def weight_eval(w: BumpWeight, x) -> float:
    return w(x)


def default_weight(c: ChartSpec) -> BumpWeight:
    """Bump centred at ``x0`` with radius ``eps0 / 2``."""
    return BumpWeight(tuple(c.x0), c.epsilon0 / 2)


def eval_rational(p: PolynomialMap, a: Sequence[int], q: int) -> Fraction:
    return p.eval_rational(a, q)

