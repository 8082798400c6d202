"""Local Legendre transform by damped Newton inversion of the gradient."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chart import PolynomialMap

MAX_ITER = 100
COND_LIMIT = 1e12


class LegendreError(RuntimeError):
    pass


class NoConvergence(LegendreError):
    pass


class SingularHessian(LegendreError):
    pass


@dataclass(frozen=True)
class SmoothScalarField:
    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    @classmethod
    def from_polynomial(cls, p: PolynomialMap, name: str = "") -> "SmoothScalarField":
        grads = [p.derivative(i) for i in range(p.n_vars)]
        hess = [[g.derivative(j) for j in range(p.n_vars)] for g in grads]

        def value(x):
            return float(p(np.asarray(x, dtype=float)))

        def gradient(x):
            x = np.asarray(x, dtype=float)
            return np.array([g(x) for g in grads], dtype=float)

        def hessian(x):
            x = np.asarray(x, dtype=float)
            return np.array([[h(x) for h in row] for row in hess], dtype=float)

        return cls(p.n_vars, value, gradient, hessian, name)


@dataclass(frozen=True)
class LegendrePoint:
    z: np.ndarray
    x: np.ndarray
    value: float
    residual: float


def invert_gradient(F: SmoothScalarField, z, x_init, tol: float = 1e-13) -> np.ndarray:
    """Solve ``grad F(x) = z`` by Newton's method, halving the step until ``|g|`` decreases."""
    z = np.asarray(z, dtype=float)
    x = np.array(x_init, dtype=float)
    g = F.gradient(x) - z
    res = float(np.max(np.abs(g)))
    for _ in range(MAX_ITER):
        if res <= tol:
            return x
        h = F.hessian(x)
        if np.linalg.cond(h) > COND_LIMIT:
            raise SingularHessian(f"Hessian condition number exceeds {COND_LIMIT:g} at x = {x}")
        step = np.linalg.solve(h, g)
        lam = 1.0
        while True:
            x_new = x - lam * step
            g_new = F.gradient(x_new) - z
            res_new = float(np.max(np.abs(g_new)))
            if res_new < res or lam < 1e-10:
                break
            lam *= 0.5
        if res_new >= res:
            # no decrease possible at working precision
            if res <= 10 * tol:
                return x
            raise NoConvergence(f"stalled at residual {res:g}")
        x, g, res = x_new, g_new, res_new
    if res <= tol:
        return x
    raise NoConvergence(f"no convergence in {MAX_ITER} iterations (residual {res:g})")


def legendre_value(F: SmoothScalarField, z, x_init=None, tol: float = 1e-13) -> LegendrePoint:
    z = np.asarray(z, dtype=float)
    x_init = z if x_init is None else x_init
    x = invert_gradient(F, z, x_init, tol)
    res = float(np.max(np.abs(F.gradient(x) - z)))
    return LegendrePoint(z, x, float(z @ x - F.value(x)), res)


def conjugate_field(F: SmoothScalarField, tol: float = 1e-13) -> SmoothScalarField:
    """``F*`` as a field.  Its gradient is the preimage ``x(z)``; its Hessian ``H_F(x(z))^-1``."""

    def value(z):
        return legendre_value(F, z, tol=tol).value

    def gradient(z):
        return invert_gradient(F, z, np.asarray(z, dtype=float), tol)

    def hessian(z):
        return np.linalg.inv(F.hessian(gradient(z)))

    return SmoothScalarField(F.dim, value, gradient, hessian, f"{F.name}*")


def hessian_fd(func: Callable[[np.ndarray], float], z, h: float) -> np.ndarray:
    """Second-order central-difference Hessian."""
    z = np.asarray(z, dtype=float)
    d = len(z)
    out = np.empty((d, d))
    f0 = func(z)
    e = np.eye(d) * h
    for i in range(d):
        out[i, i] = (func(z + e[i]) - 2 * f0 + func(z - e[i])) / h**2
        for j in range(i + 1, d):
            v = (
                func(z + e[i] + e[j]) - func(z + e[i] - e[j]) - func(z - e[i] + e[j]) + func(z - e[i] - e[j])
            ) / (4 * h**2)
            out[i, j] = out[j, i] = v
    return out


def gradient_fd(func: Callable[[np.ndarray], float], z, h: float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    e = np.eye(len(z)) * h
    return np.array([(func(z + e[i]) - func(z - e[i])) / (2 * h) for i in range(len(z))])


def hessian_identity_residual(F: SmoothScalarField, z, x_init=None) -> float:
    """``|H_{F*}(z) H_F(x) - I|_inf`` with ``H_{F*}`` from finite differences of ``F*``."""
    z = np.asarray(z, dtype=float)
    pt = legendre_value(F, z, x_init)
    h = 1e-4 * (1 + float(np.max(np.abs(z))))
    hstar = hessian_fd(lambda w: legendre_value(F, w, pt.x).value, z, h)
    return float(np.max(np.abs(hstar @ F.hessian(pt.x) - np.eye(F.dim))))


def involution_residual(F: SmoothScalarField, x, tol: float = 1e-13) -> float:
    """``|F**(x) - F(x)|`` from two nested transforms.

    The outer solve starts from ``x`` itself (not from ``grad F(x)``), so it really
    inverts ``grad F*``.
    """
    x = np.asarray(x, dtype=float)
    Fs = conjugate_field(F, tol)
    w = invert_gradient(Fs, x, x, tol)
    fss = float(x @ w - Fs.value(w))
    return abs(fss - F.value(x))


# --- fixtures ---------------------------------------------------------------

def half_norm_squared(d: int = 2) -> SmoothScalarField:
    p = PolynomialMap.from_terms(d, [("1/2", tuple(2 * (i == k) for i in range(d))) for k in range(d)])
    return SmoothScalarField.from_polynomial(p, "half_norm_squared")


def diagonal_quadratic() -> SmoothScalarField:
    """``x1^2 + (3/2) x2^2``."""
    p = PolynomialMap.from_terms(2, [(1, (2, 0)), ("3/2", (0, 2))])
    return SmoothScalarField.from_polynomial(p, "diagonal_quadratic")


def quartic_fixture(d: int = 2, seed: int = 0) -> SmoothScalarField:
    """``|x|^2/2`` plus a small random convex quartic, a cubic coupling and a tilt.

    Coefficients are drawn as rationals with denominator 100 so that the fixture is
    itself a :class:`PolynomialMap`.  On ``|x|_inf <= 1`` the Hessian eigenvalues
    stay in ``[1/2, 4]``.
    """
    rng = np.random.default_rng(seed)
    terms = [("1/2", tuple(2 * (i == k) for i in range(d))) for k in range(d)]
    for k in range(d):
        c = int(rng.integers(5, 20))
        terms.append((f"{c}/100", tuple(4 * (i == k) for i in range(d))))
    terms.append(("-1/10", tuple(int(i == 0) for i in range(d))))
    for k in range(d - 1):
        c = int(rng.integers(-5, 6))
        e = [0] * d
        e[k], e[k + 1] = 2, 1
        terms.append((f"{c}/100", tuple(e)))
    return SmoothScalarField.from_polynomial(PolynomialMap.from_terms(d, terms), f"quartic_seed{seed}")


FIXTURES = {
    "half_norm_squared": half_norm_squared,
    "diagonal_quadratic": diagonal_quadratic,
    "quartic": quartic_fixture,
}
