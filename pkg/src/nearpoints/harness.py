"""Sweeps over (Q, delta), theorem-predicted exponents and the Serre-type probe.

The implicit constants of the error bound are unknown, so every bound is reported
with constant 1 and only exponents (slopes) are ever compared.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from ._fit import loglog_slope
from .chart import BumpWeight, ChartError, ChartSpec, default_weight, format_rational, parse_rational
from .counting import CountError, CountResult, count, count_slice, _IntegerForm
from .fixtures import builtin_chart

ABOVE = "above-threshold"
BELOW = "below-threshold"
DELTA_MAX_DENOMINATOR = 10**6


class ConfigError(ValueError):
    pass


class FitError(ValueError):
    pass


# --- theorem bookkeeping ----------------------------------------------------

def _threshold_exponent(n: int, R: int) -> Fraction:
    return Fraction(n - 1, n + 2 * R - 1)


def _check_nR(n: int, R: int) -> None:
    if n < 3 or R < 1:
        raise ValueError("the bound needs n >= 3 and R >= 1")


def regime_threshold(n: int, R: int, Q: int) -> float:
    """``Q^{-(n-1)/(n+2R-1)}``."""
    _check_nR(n, R)
    return float(Q) ** -float(_threshold_exponent(n, R))


def is_above_threshold(n: int, R: int, Q: int, delta) -> bool:
    """Exact test of ``delta >= Q^{-s}``, i.e. ``delta^den(s) * Q^num(s) >= 1``."""
    _check_nR(n, R)
    s = _threshold_exponent(n, R)
    delta = Fraction(delta)
    if delta <= 0:
        return False
    return delta**s.denominator * Q**s.numerator >= 1


def log_factor_descriptor(n: int) -> str:
    if n == 3:
        return "exp(c*sqrt(log Q)), c=1"
    return "(log Q)^c, c=1"


def regime1_exponents(n: int, R: int) -> tuple[Fraction, Fraction]:
    return Fraction((R - 1) * (n - 1), n + 1), n + Fraction(2, n + 1)


def regime2_exponent(n: int, R: int) -> Fraction:
    return n - Fraction((R - 1) * n + 1 - 3 * R, n + 2 * R - 1)


@dataclass(frozen=True)
class TheoremBound:
    n: int
    R: int
    Q: int
    delta: Fraction
    regime: str
    delta_exponent: Fraction
    q_exponent: Fraction
    log_factor: str
    constant: float = 1.0

    @property
    def value(self) -> float:
        """``delta^a Q^b`` with every unknown constant (and the log factor) set to 1."""
        d = float(self.delta) ** float(self.delta_exponent) if self.delta_exponent else 1.0
        return self.constant * d * float(self.Q) ** float(self.q_exponent)


def theorem_bound(n: int, R: int, Q: int, delta) -> TheoremBound:
    delta = Fraction(delta)
    if is_above_threshold(n, R, Q, delta):
        de, qe = regime1_exponents(n, R)
        regime = ABOVE
    else:
        de, qe = Fraction(0), regime2_exponent(n, R)
        regime = BELOW
    return TheoremBound(n, R, Q, delta, regime, de, qe, log_factor_descriptor(n))


def fit_exponent(pairs: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of ``log value`` against ``log Q``."""
    if len(pairs) < 3:
        raise FitError(f"need at least 3 (Q, value) pairs, got {len(pairs)}")
    qs, vs = zip(*pairs)
    if min(vs) <= 0:
        raise FitError("values must be positive")
    return loglog_slope(qs, vs)[0]


# --- schedules and config ---------------------------------------------------

def _exact_power(Q: int, beta: Fraction) -> Fraction | None:
    """``Q^beta`` if it is rational, else None."""
    p, r = beta.numerator, beta.denominator
    base = Fraction(Q) ** p
    num, den = base.numerator, base.denominator
    roots = []
    for v in (num, den):
        guess = round(v ** (1.0 / r))
        root = next((g for g in (guess - 1, guess, guess + 1) if g >= 0 and g**r == v), None)
        if root is None:
            return None
        roots.append(root)
    return Fraction(roots[0], roots[1])


@dataclass(frozen=True)
class DeltaSchedule:
    """``delta(Q) = A Q^{-beta}``, exact when ``Q^beta`` is rational, else rounded to denominators <= 10^6."""

    A: Fraction
    beta: Fraction

    def __call__(self, Q: int) -> Fraction:
        exact = _exact_power(Q, self.beta)
        if exact is not None:
            return self.A / exact
        return Fraction(float(self.A) * float(Q) ** -float(self.beta)).limit_denominator(DELTA_MAX_DENOMINATOR)

    def is_exact(self, Q: int) -> bool:
        return _exact_power(Q, self.beta) is not None


def load_chart(spec) -> ChartSpec:
    """A builtin name, ``{"builtin": name, "epsilon0": ...}`` or a full chart document."""
    try:
        if isinstance(spec, str):
            return builtin_chart(spec)
        if isinstance(spec, dict) and "builtin" in spec:
            eps = parse_rational(spec.get("epsilon0", "1/10"))
            return builtin_chart(spec["builtin"], eps)
        if isinstance(spec, dict):
            return ChartSpec.from_dict(spec)
    except (ChartError, KeyError) as exc:
        raise ConfigError(f"bad chart: {exc}") from None
    raise ConfigError(f"chart must be a name or an object, got {type(spec).__name__}")


def load_weight(spec, c: ChartSpec) -> BumpWeight | None:
    """``"default"`` (bump at x0, radius eps0/2), ``"none"``/null (unweighted) or a bump document."""
    if spec is None or spec == "none":
        return None
    if spec == "default":
        return default_weight(c)
    if isinstance(spec, dict):
        try:
            w = BumpWeight.from_dict(spec)
        except (ChartError, ValueError) as exc:
            raise ConfigError(f"bad weight: {exc}") from None
        if w.dim != c.n:
            raise ConfigError("weight dimension does not match the chart")
        return w
    raise ConfigError(f"unknown weight {spec!r}")


def q_list(values) -> list[int]:
    if isinstance(values, int):
        values = [values]
    try:
        qs = [int(q) for q in values]
    except (TypeError, ValueError):
        raise ConfigError("Q must be an integer or a list of integers") from None
    if not qs or min(qs) < 1:
        raise ConfigError("Q values must be >= 1")
    return qs


def rational(value, name: str) -> Fraction:
    try:
        return parse_rational(value)
    except (ChartError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


@dataclass(frozen=True)
class SweepConfig:
    chart: ChartSpec
    weight: BumpWeight | None
    Q: tuple[int, ...]
    schedule: DeltaSchedule
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if "chart" not in data or "Q" not in data:
            raise ConfigError("sweep config needs 'chart' and 'Q'")
        c = load_chart(data["chart"])
        w = load_weight(data.get("weight", "default"), c)
        qs = tuple(sorted(set(q_list(data["Q"]))))
        sched = data.get("delta_schedule", {})
        A = rational(sched.get("A", "1"), "delta_schedule.A")
        beta = rational(sched.get("beta", "0"), "delta_schedule.beta")
        if A <= 0 or beta < 0:
            raise ConfigError("delta schedule needs A > 0 and beta >= 0")
        schedule = DeltaSchedule(A, beta)
        if schedule(qs[0]) > Fraction(1, 2):
            raise ConfigError(f"delta({qs[0]}) = {float(schedule(qs[0])):g} exceeds 1/2")
        workers = int(data.get("workers", 1))
        if workers < 1:
            raise ConfigError("workers must be >= 1")
        return cls(c, w, qs, schedule, workers)


# --- sweep ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    result: CountResult
    bound: TheoremBound
    A: Fraction
    beta: Fraction
    delta_exact: bool  # False when A Q^-beta was rounded

    @property
    def empirical_constant(self) -> float:
        """``N_omega / (delta^R Q^{n+1})``."""
        r = self.result
        scale = float(r.delta) ** r.R * float(r.Q) ** (self.bound.n + 1)
        return r.n_weighted / scale if scale else math.nan


@dataclass
class SweepTable:
    rows: list[SweepRow]
    fitted_error_exponent: float
    fitted_count_exponent: float

    def regimes(self) -> list[str]:
        return [r.bound.regime for r in self.rows]


def _fit_or_nan(pairs) -> float:
    try:
        return fit_exponent(pairs)
    except FitError:
        return math.nan


def sweep(config: SweepConfig | dict) -> SweepTable:
    cfg = config if isinstance(config, SweepConfig) else SweepConfig.from_dict(config)
    c = cfg.chart
    cells = [(Q, cfg.schedule(Q)) for Q in cfg.Q]
    for Q, d in cells:
        if d > Fraction(1, 2):
            raise ConfigError(f"delta({Q}) exceeds 1/2")

    def run(cell):
        Q, d = cell
        return count(c, cfg.weight, Q, d)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(cell) for cell in cells]
    rows = [
        SweepRow(r, theorem_bound(c.n, c.R, Q, d), cfg.schedule.A, cfg.schedule.beta, cfg.schedule.is_exact(Q))
        for (Q, d), r in zip(cells, results)
    ]
    rows.sort(key=lambda row: (row.result.Q, row.result.delta))
    err = _fit_or_nan([(row.result.Q, row.result.error) for row in rows])
    cnt = _fit_or_nan([(row.result.Q, row.result.n_weighted) for row in rows])
    return SweepTable(rows, err, cnt)


# --- Serre-type probe -------------------------------------------------------

@dataclass(frozen=True)
class SerreReport:
    Q: tuple[int, ...]
    counts: tuple[int, ...]
    slope: float
    corollary_exponent: Fraction
    trivial_exponent: int

    @property
    def exceeds_trivial(self) -> bool:
        return self.slope > self.trivial_exponent

    @property
    def below_corollary(self) -> bool:
        return self.slope <= float(self.corollary_exponent)


def on_manifold_counts(c: ChartSpec, Q_list: Sequence[int]) -> list[int]:
    """Cumulative ``delta = 0`` counts, enumerating every q only once."""
    qs = sorted(set(Q_list))
    forms = [_IntegerForm.of(p) for p in c.components]
    out, total, q = {}, 0, 0
    for Q in qs:
        while q < Q:
            q += 1
            total += count_slice(c, None, q, Fraction(0), forms).n_on_manifold
        out[Q] = total
    return [out[Q] for Q in Q_list]


def serre_probe(c: ChartSpec, Q_list: Sequence[int]) -> SerreReport:
    if len(set(Q_list)) < 3:
        raise FitError("insufficient points for fit: need at least 3 distinct Q")
    qs = tuple(sorted(set(int(q) for q in Q_list)))
    counts = tuple(on_manifold_counts(c, qs))
    slope = fit_exponent(list(zip(qs, counts)))
    return SerreReport(qs, counts, slope, regime2_exponent(c.n, c.R), c.n)


# --- reports ----------------------------------------------------------------

SWEEP_COLUMNS = [
    "Q", "delta", "A", "beta", "delta_exact", "n", "R", "regime",
    "n_weighted", "n0_weighted", "n_unweighted", "n0_unweighted", "n_on_manifold",
    "main_term", "error", "relative_error", "delta_exponent", "q_exponent",
    "bound", "log_factor", "empirical_constant",
]


def _g(x: float) -> str:
    return f"{x:.17g}"


def sweep_row_record(row: SweepRow) -> dict:
    r, b = row.result, row.bound
    return {
        "Q": r.Q,
        "delta": format_rational(r.delta),
        "A": format_rational(row.A),
        "beta": format_rational(row.beta),
        "delta_exact": row.delta_exact,
        "n": b.n,
        "R": b.R,
        "regime": b.regime,
        "n_weighted": r.n_weighted,
        "n0_weighted": r.n0_weighted,
        "n_unweighted": r.n_unweighted,
        "n0_unweighted": r.n0_unweighted,
        "n_on_manifold": r.n_on_manifold,
        "main_term": r.main_term,
        "error": r.error,
        "relative_error": r.relative_error,
        "delta_exponent": format_rational(b.delta_exponent),
        "q_exponent": format_rational(b.q_exponent),
        "bound": b.value,
        "log_factor": b.log_factor,
        "empirical_constant": row.empirical_constant,
    }


def write_csv(path, columns: Sequence[str], records: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for rec in records:
            w.writerow([_g(rec[k]) if isinstance(rec[k], float) else rec[k] for k in columns])


def write_json(path, records: Sequence[dict], meta: dict | None = None) -> None:
    doc = {"rows": list(records)}
    if meta:
        doc.update(meta)
    Path(path).write_text(json.dumps(doc, indent=2, allow_nan=True) + "\n")


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_sweep(table: SweepTable, path, json_path=None) -> None:
    records = [sweep_row_record(r) for r in table.rows]
    write_csv(path, SWEEP_COLUMNS, records)
    if json_path:
        write_json(json_path, records, {
            "fitted_error_exponent": table.fitted_error_exponent,
            "fitted_count_exponent": table.fitted_count_exponent,
        })


def read_sweep_csv(path) -> list[dict]:
    """Parse a sweep CSV back into typed records (floats, ints, bools, rationals as strings)."""
    ints = {"Q", "n", "R", "n_unweighted", "n0_unweighted", "n_on_manifold"}
    floats = {"n_weighted", "n0_weighted", "main_term", "error", "relative_error", "bound", "empirical_constant"}
    out = []
    for raw in read_csv(path):
        rec = {}
        for k in SWEEP_COLUMNS:
            v = raw[k]
            if k in ints:
                rec[k] = int(v)
            elif k in floats:
                rec[k] = float(v)
            elif k == "delta_exact":
                rec[k] = v == "True"
            else:
                rec[k] = v
        out.append(rec)
    return out

