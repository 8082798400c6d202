"""Curvature conditions at the chart centre and the principal-minor cover.

Two conditions on the pencil of Hessians ``H(t) = sum_r t_r H_{f_r}(x0)``:

* full:  ``det H(t) != 0`` for every ``t != 0``;
* rank:  ``rank H(t) >= n - 1`` for every ``t != 0``.

Both are homogeneous in ``t``, so only one representative of each antipodal pair on
the sup-norm sphere ``|t|_inf = 1`` is sampled.  Failure is only ever declared on an
exact rational witness; numerical minima that are merely small give ``undecided``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .chart import ChartSpec, format_rational
from .exact import exact_det, exact_rank, interpolate, isolate_roots, minor, poly_trim

HOLDS, FAILS, UNDECIDED = "holds", "fails", "undecided"

DET_TOL = 1e-8
SIGMA_TOL = 1e-8


class CoverError(RuntimeError):
    """Some sampled direction has every principal (n-1)-minor equal to zero."""


def hessian_basis(c: ChartSpec, x=None) -> list[list[list[Fraction]]]:
    """Exact Hessians ``H_{f_r}(x)`` (default ``x = x0``) as nested lists."""
    x = c.x0 if x is None else x
    return [p.hessian(x).tolist() for p in c.components]


def pencil(basis, t) -> list[list]:
    """``sum_r t_r basis[r]``; exact when ``t`` is rational."""
    n = len(basis[0])
    exact = all(isinstance(v, (int, Fraction)) for v in t)
    zero = Fraction(0) if exact else 0.0
    out = [[zero] * n for _ in range(n)]
    for tr, h in zip(t, basis):
        if tr == 0:
            continue
        for i in range(n):
            for j in range(n):
                out[i][j] += (tr if exact else float(tr)) * (h[i][j] if exact else float(h[i][j]))
    return out


def _float_basis(basis) -> np.ndarray:
    return np.array([[[float(v) for v in row] for row in h] for h in basis])


def sphere_samples(R: int, grid_per_axis: int) -> list[tuple[Fraction, ...]]:
    """One representative per antipodal pair on a uniform grid of ``|t|_inf = 1``.

    Face ``k`` fixes ``t_k = +1``; coordinates before ``k`` stay in the open interval
    so that edge points are not repeated.  Order is lexicographic (face, grid index).
    """
    g = grid_per_axis
    axis = [Fraction(-1) + Fraction(2 * m, g - 1) for m in range(g)]
    inner = axis[1:-1]
    out = []
    for k in range(R):
        axes = [inner] * k + [[Fraction(1)]] + [axis] * (R - 1 - k)
        out.extend(itertools.product(*axes))
    return out


def _face_point(k: int, u: Sequence[float], R: int) -> list[float]:
    u = [float(v) for v in u]
    return u[:k] + [1.0] + u[k:]


def _zoom_minimise(func: Callable[[np.ndarray], float], u0: np.ndarray, h0: float, iters: int = 400):
    """Deterministic pattern search on ``[-1, 1]^d``; halves the step when the centre wins."""
    u = np.array(u0, dtype=float)
    best = func(u)
    d = len(u)
    if d == 0:
        return u, best
    offsets = [np.array(o, dtype=float) for o in itertools.product((-1.0, -0.5, 0.0, 0.5, 1.0), repeat=d) if any(o)]
    h = h0
    for _ in range(iters):
        if h < 1e-15:
            break
        moved = False
        for o in offsets:
            cand = np.clip(u + h * o, -1.0, 1.0)
            val = func(cand)
            if val < best:
                best, u, moved = val, cand, True
        if not moved:
            h *= 0.5
    return u, best


def _rationalise(t: Sequence[float]) -> list[tuple[Fraction, ...]]:
    out = []
    for lim in (8, 64, 1000, 10**5):
        cand = tuple(Fraction(v).limit_denominator(lim) for v in t)
        if cand not in out and any(cand):
            out.append(cand)
    return out


@dataclass
class ConditionResult:
    condition: str  # "full" or "rank"
    verdict: str
    witness: tuple
    grid_minimum: float
    refined_minimum: float
    exact: bool
    witnesses: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "witness": [_fmt_t(v) for v in self.witness],
            "witnesses": [[_fmt_t(v) for v in w] for w in self.witnesses],
            "grid_minimum": f"{self.grid_minimum:.12g}",
            "refined_minimum": f"{self.refined_minimum:.12g}",
            "exact": self.exact,
        }


def _fmt_t(v) -> str:
    return format_rational(v) if isinstance(v, (int, Fraction)) else f"{float(v):.12g}"


def _det_binary_face(basis, face: int) -> list[Fraction]:
    """Exact coefficients of ``s -> det H(t)`` on face ``t_face = 1`` (R = 2)."""
    n = len(basis[0])
    xs = [Fraction(k) for k in range(n + 1)]
    ys = []
    for s in xs:
        t = (Fraction(1), s) if face == 0 else (s, Fraction(1))
        ys.append(exact_det(pencil(basis, t)))
    return interpolate(xs, ys)


def check_condition_full(c: ChartSpec, grid_per_axis: int = 9) -> ConditionResult:
    """Decide ``det H(t) != 0`` on the t-sphere.  Exact for R <= 2."""
    if grid_per_axis < 8:
        raise ValueError("grid_per_axis must be >= 8")
    basis = hessian_basis(c)
    fb = _float_basis(basis)
    R, n = c.R, c.n
    samples = sphere_samples(R, grid_per_axis)

    def num_det(t) -> float:
        return abs(float(np.linalg.det(np.tensordot(np.asarray(t, dtype=float), fb, axes=1))))

    dets = [num_det(t) for t in samples]
    i_min = int(np.argmin(dets))
    grid_min = dets[i_min]
    scale = max(float(np.max(np.abs(np.tensordot(np.asarray(t, dtype=float), fb, axes=1)))) for t in samples)
    tol = DET_TOL * max(scale, 1e-300) ** n

    # local refinement around the minimal sample, within its face
    t_best = samples[i_min]
    face = next(k for k, v in enumerate(t_best) if v == 1 and all(abs(w) < 1 for w in t_best[:k]))
    u0 = np.array([float(v) for j, v in enumerate(t_best) if j != face])
    u_ref, refined = _zoom_minimise(lambda u: num_det(_face_point(face, u, R)), u0, 2.0 / (grid_per_axis - 1))
    t_ref = tuple(_face_point(face, u_ref, R))

    if R == 1:
        d = exact_det(pencil(basis, (Fraction(1),)))
        verdict = HOLDS if d != 0 else FAILS
        return ConditionResult("full", verdict, (Fraction(1),), grid_min, abs(float(d)), True,
                               [] if d else [(Fraction(1),)])

    if R == 2:
        roots = []
        for f in (0, 1):
            p = _det_binary_face(basis, f)
            if not poly_trim(p):
                w = (Fraction(1), Fraction(0))
                return ConditionResult("full", FAILS, w, 0.0, 0.0, True, [w])
            for a, b in isolate_roots(p, Fraction(-1), Fraction(1)):
                s = a if a == b else (a + b) / 2
                if f == 1 and abs(s) == 1:
                    continue  # (+-1, 1) already represented on face 0
                roots.append((abs(s), f, s, a == b))
        if not roots:
            return ConditionResult("full", HOLDS, t_ref, grid_min, refined, True)
        ws = [(Fraction(1), s) if f == 0 else (s, Fraction(1)) for _, f, s, _ in roots]
        # primary witness: the root closest to its face centre
        _, f, s, is_exact = min(roots, key=lambda r: (r[0], r[1], r[2]))
        w = (Fraction(1), s) if f == 0 else (s, Fraction(1))
        val = 0.0 if is_exact else num_det(w)
        return ConditionResult("full", FAILS, w, grid_min, val, True, ws)

    for t, d in zip(samples, dets):
        if d <= tol and exact_det(pencil(basis, t)) == 0:
            return ConditionResult("full", FAILS, t, grid_min, 0.0, True, [t])
    for cand in _rationalise(t_ref):
        if exact_det(pencil(basis, cand)) == 0:
            return ConditionResult("full", FAILS, cand, grid_min, 0.0, True, [cand])
    verdict = HOLDS if refined > tol else UNDECIDED
    return ConditionResult("full", verdict, t_ref, grid_min, refined, False)


def _sigma_second_smallest(h: np.ndarray) -> float:
    sv = np.sort(np.abs(np.linalg.eigvalsh(h)))
    return float(sv[1]) if len(sv) > 1 else float(sv[0])


def check_condition_rank(c: ChartSpec, grid_per_axis: int = 9) -> ConditionResult:
    """Decide ``rank H(t) >= n - 1`` on the t-sphere via the second-smallest singular value."""
    if grid_per_axis < 8:
        raise ValueError("grid_per_axis must be >= 8")
    basis = hessian_basis(c)
    fb = _float_basis(basis)
    R, n = c.R, c.n
    samples = sphere_samples(R, grid_per_axis)

    def sigma(t) -> float:
        return _sigma_second_smallest(np.tensordot(np.asarray(t, dtype=float), fb, axes=1))

    sig = [sigma(t) for t in samples]
    i_min = int(np.argmin(sig))
    grid_min = sig[i_min]
    scale = max(float(np.max(np.abs(np.tensordot(np.asarray(t, dtype=float), fb, axes=1)))) for t in samples)
    tol = SIGMA_TOL * max(scale, 1e-300)

    for t in samples:
        if exact_rank(pencil(basis, t)) <= n - 2:
            return ConditionResult("rank", FAILS, t, grid_min, 0.0, True, [t])

    t_best = samples[i_min]
    face = next(k for k, v in enumerate(t_best) if v == 1 and all(abs(w) < 1 for w in t_best[:k]))
    u0 = np.array([float(v) for j, v in enumerate(t_best) if j != face])
    u_ref, refined = _zoom_minimise(lambda u: sigma(_face_point(face, u, R)), u0, 2.0 / (grid_per_axis - 1))
    t_ref = tuple(_face_point(face, u_ref, R))
    for cand in _rationalise(t_ref):
        if exact_rank(pencil(basis, cand)) <= n - 2:
            return ConditionResult("rank", FAILS, cand, grid_min, 0.0, True, [cand])
    verdict = HOLDS if refined > tol else UNDECIDED
    return ConditionResult("rank", verdict, t_ref, grid_min, refined, False)


def principal_minor(c: ChartSpec, t: Sequence, i: int):
    """Determinant of ``H(t)`` at ``x0`` with row and column ``i`` (1-based) deleted."""
    if not 1 <= i <= c.n:
        raise IndexError(f"minor index {i} outside 1..{c.n}")
    if not any(t):
        raise ValueError("t must be nonzero")
    h = pencil(hessian_basis(c), t)
    sub = minor(h, i - 1)
    if all(isinstance(v, (int, Fraction)) for v in t):
        return exact_det(sub)
    return float(np.linalg.det(np.array(sub, dtype=float))) if sub else 1.0


@dataclass
class CoverSample:
    t: tuple
    nu: int
    margin: float


@dataclass
class CoverResult:
    samples: list[CoverSample]
    min_margin: float

    def to_dict(self) -> dict:
        return {
            "min_margin": f"{self.min_margin:.12g}",
            "samples": [
                {"t": [_fmt_t(v) for v in s.t], "nu": s.nu, "margin": f"{s.margin:.12g}"} for s in self.samples
            ],
        }


def cover_assignment(c: ChartSpec, grid_per_axis: int = 9) -> CoverResult:
    """Assign each sampled direction to the principal minor of largest modulus."""
    basis = hessian_basis(c)
    out = []
    for t in sphere_samples(c.R, grid_per_axis):
        h = pencil(basis, t)
        mags = [abs(exact_det(minor(h, i))) for i in range(c.n)]
        best = max(mags)
        if best == 0:
            raise CoverError(f"all principal minors vanish at t = {[format_rational(v) for v in t]}")
        nu = mags.index(best) + 1  # smallest index wins ties
        out.append(CoverSample(tuple(t), nu, float(best)))
    return CoverResult(out, min(s.margin for s in out))


@dataclass
class HessianBoxBounds:
    c1: float
    c2: float
    raw_min: float
    raw_max: float
    box_radius: Fraction
    valid: bool
    t_set_description: str
    safety: tuple[float, float] = (0.9, 1.1)

    def to_dict(self) -> dict:
        return {
            "c1": f"{self.c1:.12g}",
            "c2": f"{self.c2:.12g}",
            "raw_min": f"{self.raw_min:.12g}",
            "raw_max": f"{self.raw_max:.12g}",
            "box_radius": format_rational(self.box_radius),
            "valid": self.valid,
            "t_set": self.t_set_description,
            "safety": list(self.safety),
        }


def hessian_box_bounds(
    c: ChartSpec, nu: int, box_radius, t_samples: Sequence[Sequence], points_per_axis: int = 5
) -> HessianBoxBounds:
    """Bounds on ``|minor_nu H_{t.f}(x)|`` over a tensor grid of the box ``x0 +- box_radius``."""
    box_radius = Fraction(box_radius)
    if box_radius < 0 or box_radius > 2 * c.epsilon0:
        raise ValueError("box_radius must lie in [0, 2 * epsilon0]")
    if not 1 <= nu <= c.n:
        raise IndexError(f"minor index {nu} outside 1..{c.n}")
    if box_radius == 0:
        offsets = [Fraction(0)]
    else:
        m = points_per_axis
        offsets = [-box_radius + 2 * box_radius * Fraction(k, m - 1) for k in range(m)]
    vals = []
    for off in itertools.product(offsets, repeat=c.n):
        x = tuple(x0 + o for x0, o in zip(c.x0, off))
        basis = hessian_basis(c, x)
        for t in t_samples:
            sub = minor(pencil(basis, t), nu - 1)
            if all(isinstance(v, (int, Fraction)) for v in t):
                vals.append(abs(float(exact_det(sub))))
            else:
                vals.append(abs(float(np.linalg.det(np.array(sub, dtype=float)))))
    lo, hi = min(vals), max(vals)
    desc = f"{len(t_samples)} directions x {len(offsets)}^{c.n} box points"
    return HessianBoxBounds(0.9 * lo, 1.1 * hi, lo, hi, box_radius, lo > 0, desc)


@dataclass
class CurvatureReport:
    condition_full: ConditionResult
    condition_rank: ConditionResult
    grid_resolution: int
    cover: CoverResult | None
    cover_error: str | None = None

    @property
    def min_abs_det(self) -> float:
        return self.condition_full.refined_minimum

    @property
    def min_sigma_nminus1(self) -> float:
        return self.condition_rank.grid_minimum

    def to_dict(self) -> dict:
        return {
            "condition_full": self.condition_full.to_dict(),
            "condition_rank": self.condition_rank.to_dict(),
            "min_abs_det": f"{self.min_abs_det:.12g}",
            "min_sigma_nminus1": f"{self.min_sigma_nminus1:.12g}",
            "grid_resolution": self.grid_resolution,
            "cover": None if self.cover is None else self.cover.to_dict(),
            "cover_error": self.cover_error,
        }


def curvature_report(c: ChartSpec, grid_per_axis: int = 9) -> CurvatureReport:
    full = check_condition_full(c, grid_per_axis)
    rank = check_condition_rank(c, grid_per_axis)
    cover, err = None, None
    if rank.verdict == HOLDS:
        try:
            cover = cover_assignment(c, grid_per_axis)
        except CoverError as exc:
            err = str(exc)
    else:
        err = f"rank condition {rank.verdict}; cover not built"
    return CurvatureReport(full, rank, grid_per_axis, cover, err)
