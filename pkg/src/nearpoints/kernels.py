"""Selberg majorant/minorant of the short-interval indicator and the Fejer kernel.

The Selberg pair for ``[-delta, delta]`` on R/Z is assembled from Vaaler's
trigonometric approximation ``V_J`` of the sawtooth ``psi(x) = x - floor(x) - 1/2``:

    chi(x) = 2 delta + psi(-delta - x) + psi(x - delta)
    S^{+-}(x) = 2 delta + V_J(-delta - x) + V_J(x - delta)
                +- (Delta(x + delta) + Delta(x - delta)) / (2 (J + 1))

with ``Delta`` the Fejer kernel of order ``J + 1``.  Vaaler's bound
``|psi - V_J| <= Delta / (2J + 2)`` gives the sandwich.  Expanding in ``e(jx)``:

    S^{+-}^(j) = g(|j|/(J+1)) sin(2 pi j delta) / (pi j)
                 +- (1 - |j|/(J+1)) cos(2 pi j delta) / (J + 1),
    g(u) = pi u (1 - u) cot(pi u) + u.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class SelbergPair:
    J: int
    delta: Fraction
    coeffs_plus: np.ndarray  # index j = 0..J; symmetric in j
    coeffs_minus: np.ndarray

    def coeff(self, sign: str, j: int) -> float:
        c = self.coeffs_plus if sign == "+" else self.coeffs_minus
        j = abs(j)
        return float(c[j]) if j <= self.J else 0.0

    def full_coefficients(self, sign: str) -> dict[int, float]:
        return {j: self.coeff(sign, j) for j in range(-self.J, self.J + 1)}


def _vaaler_weight(u: np.ndarray) -> np.ndarray:
    return np.pi * u * (1.0 - u) / np.tan(np.pi * u) + u


def selberg_build(J: int, delta) -> SelbergPair:
    if J < 1:
        raise ValueError("degree J must be >= 1")
    delta = Fraction(delta) if not isinstance(delta, float) else Fraction(delta).limit_denominator(10**12)
    if not 0 < delta <= Fraction(1, 2):
        raise ValueError("delta must lie in (0, 1/2]")
    d = float(delta)
    j = np.arange(1, J + 1, dtype=float)
    u = j / (J + 1)
    odd = _vaaler_weight(u) * np.sin(2 * np.pi * j * d) / (np.pi * j)
    even = (1.0 - u) * np.cos(2 * np.pi * j * d) / (J + 1)
    plus = np.concatenate(([2 * d + 1.0 / (J + 1)], odd + even))
    minus = np.concatenate(([2 * d - 1.0 / (J + 1)], odd - even))
    return SelbergPair(J, delta, plus, minus)


def selberg_eval(p: SelbergPair, sign: str, x) -> float | np.ndarray:
    """``sum_{|j|<=J} S^(j) e(j x)``; real part returned after checking the imaginary part."""
    if sign not in "+-" or len(sign) != 1:
        raise ValueError("sign must be '+' or '-'")
    c = p.coeffs_plus if sign == "+" else p.coeffs_minus
    x = np.asarray(x, dtype=float)
    js = np.arange(-p.J, p.J + 1)
    coeffs = c[np.abs(js)]
    phase = np.exp(2j * np.pi * np.multiply.outer(x, js))
    val = phase @ coeffs
    imag = np.max(np.abs(np.imag(val))) if val.size else 0.0
    if imag > 1e-10:
        raise ArithmeticError(f"imaginary part {imag:g} exceeds 1e-10")
    val = np.real(val)
    return val if val.ndim else float(val)


def dist_to_int(x) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    out = np.abs(x - np.round(x))
    return out if out.ndim else float(out)


def indicator(delta: float, x) -> np.ndarray | float:
    """chi_delta: 1 where ``||x|| <= delta`` else 0."""
    out = (dist_to_int(x) <= float(delta)).astype(float)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class SandwichCheck:
    min_upper_slack: float  # min S+ - chi
    min_lower_slack: float  # min chi - S-
    coefficient_bound_ok: bool
    mean_plus_error: float
    mean_minus_error: float

    def ok(self, tol: float = 1e-9, mean_tol: float = 1e-12) -> bool:
        return (
            self.min_upper_slack >= -tol
            and self.min_lower_slack >= -tol
            and self.coefficient_bound_ok
            and self.mean_plus_error <= mean_tol
            and self.mean_minus_error <= mean_tol
        )


def coefficient_bound(J: int, delta: float, j: int) -> float:
    d = float(delta)
    return 1.0 / (J + 1) + (2 * d if j == 0 else min(2 * d, 1.0 / (math.pi * abs(j))))


def check_selberg(p: SelbergPair, grid: int = 10_000, jump_exclusion: float = 1e-6) -> SandwichCheck:
    """Sandwich on a uniform grid of [0, 1) away from the jumps, plus coefficient contracts."""
    d = float(p.delta)
    x = np.arange(grid) / grid
    dist = dist_to_int(x)
    keep = np.abs(dist - d) > jump_exclusion
    x = x[keep]
    chi = indicator(d, x)
    up = selberg_eval(p, "+", x) - chi
    lo = chi - selberg_eval(p, "-", x)
    bound_ok = all(
        abs(p.coeff(s, j)) <= coefficient_bound(p.J, d, j) + 1e-15 for s in "+-" for j in range(0, p.J + 1)
    )
    return SandwichCheck(
        float(np.min(up)),
        float(np.min(lo)),
        bound_ok,
        abs(p.coeff("+", 0) - (2 * d + 1.0 / (p.J + 1))),
        abs(p.coeff("-", 0) - (2 * d - 1.0 / (p.J + 1))),
    )


def fejer_eval(D: int, theta, check: bool = True) -> float | np.ndarray:
    """Fejer kernel ``sum_{|d|<=D} (D - |d|)/D^2 e(d theta)``, cross-checked with the sine form."""
    if D < 1:
        raise ValueError("D must be >= 1")
    theta = np.asarray(theta, dtype=float)
    d = np.arange(1, D)
    w = (D - d) / D**2
    val = 1.0 / D + 2.0 * (np.cos(2 * np.pi * np.multiply.outer(theta, d)) @ w)
    if check:
        s = np.sin(np.pi * theta)
        ok = np.abs(s) > 1e-3
        if np.any(ok):
            closed = (np.sin(np.pi * D * theta[ok]) / (D * s[ok])) ** 2
            err = np.max(np.abs(closed - val[ok]))
            if err > 1e-9:
                raise ArithmeticError(f"Fejer coefficient sum and closed form differ by {err:g}")
    return val if val.ndim else float(val)


@dataclass(frozen=True)
class FejerCheck:
    T: float
    D: int
    min_slack: float
    n_checked: int
    counterexample: float | None

    @property
    def ok(self) -> bool:
        return self.counterexample is None


def fejer_majorant_check(T: float, theta_samples: Sequence[float]) -> FejerCheck:
    """Check ``chi_{1/T}(theta) <= pi^2/4 F_D(theta)`` with ``D = floor(T/2)`` on the samples."""
    if T < 2:
        raise ValueError("T must be >= 2")
    D = int(math.floor(T / 2))
    th = np.asarray(theta_samples, dtype=float)
    th = th[dist_to_int(th) <= 1.0 / T]
    slack = (math.pi**2 / 4) * fejer_eval(D, th) - 1.0
    slack = np.atleast_1d(slack)
    bad = np.nonzero(slack < 0)[0]
    return FejerCheck(
        float(T), D, float(np.min(slack)) if slack.size else math.inf, int(th.size),
        float(th[bad[0]]) if bad.size else None,
    )


def write_coefficients_csv(p: SelbergPair, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "s_plus", "s_minus"])
        for j in range(-p.J, p.J + 1):
            w.writerow([j, f"{p.coeff('+', j):.17g}", f"{p.coeff('-', j):.17g}"])
