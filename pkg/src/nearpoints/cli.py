"""Command line entry point: ``nearpoints <subcommand> --config cfg.json --out out.csv``.

Exit codes: 0 success, 2 configuration error, 3 a verification verdict failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import curvature, harness, kernels, legendre, oscillatory
from .chart import BumpWeight, ChartError, PolynomialMap, format_rational
from .counting import CountError, count

log = logging.getLogger("nearpoints")

EXIT_OK, EXIT_CONFIG, EXIT_VERDICT = 0, 2, 3

COUNT_COLUMNS = [
    "Q", "delta", "R", "n_weighted", "n0_weighted", "n_unweighted", "n0_unweighted",
    "n_on_manifold", "main_term", "error", "relative_error",
]
CURVATURE_COLUMNS = ["condition", "verdict", "witness", "grid_minimum", "refined_minimum", "exact", "witnesses"]
KERNEL_COLUMNS = ["kind", "degree", "delta", "upper_slack", "lower_slack", "bounds_ok", "mean_error", "ok"]
LEGENDRE_COLUMNS = ["fixture", "index", "point", "involution_residual", "hessian_residual", "ok"]
OSCILLATORY_COLUMNS = ["lambda", "re", "im", "abs", "error_estimate", "main_re", "main_im"]
SERRE_COLUMNS = ["Q", "n_on_manifold", "fitted_slope", "corollary_exponent", "trivial_exponent"]


def _need(cfg: dict, key: str):
    if key not in cfg:
        raise harness.ConfigError(f"missing config key '{key}'")
    return cfg[key]


def _floats(values, name) -> list[float]:
    try:
        return [float(v) for v in values]
    except (TypeError, ValueError):
        raise harness.ConfigError(f"'{name}' must be a list of numbers") from None


def _int(value, name) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise harness.ConfigError(f"'{name}' must be an integer") from None


def _emit(args, columns, records, meta=None) -> None:
    harness.write_csv(args.out, columns, records)
    if args.json:
        harness.write_json(args.json, records, meta)
    log.info("wrote %d rows to %s", len(records), args.out)


# --- subcommands ------------------------------------------------------------

def cmd_count(cfg: dict, args) -> int:
    c = harness.load_chart(_need(cfg, "chart"))
    w = harness.load_weight(cfg.get("weight", "default"), c)
    qs = harness.q_list(_need(cfg, "Q"))
    deltas = cfg.get("delta", "0")
    deltas = deltas if isinstance(deltas, list) else [deltas]
    deltas = [harness.rational(d, "delta") for d in deltas]
    workers = int(cfg.get("workers", 1))
    records = []
    for Q in qs:
        for d in deltas:
            r = count(c, w, Q, d, workers=workers)
            records.append({
                "Q": r.Q, "delta": format_rational(r.delta), "R": r.R,
                "n_weighted": r.n_weighted, "n0_weighted": r.n0_weighted,
                "n_unweighted": r.n_unweighted, "n0_unweighted": r.n0_unweighted,
                "n_on_manifold": r.n_on_manifold, "main_term": r.main_term,
                "error": r.error, "relative_error": r.relative_error,
            })
    _emit(args, COUNT_COLUMNS, records)
    return EXIT_OK


def cmd_sweep(cfg: dict, args) -> int:
    table = harness.sweep(harness.SweepConfig.from_dict(cfg))
    records = [harness.sweep_row_record(r) for r in table.rows]
    _emit(args, harness.SWEEP_COLUMNS, records, {
        "fitted_error_exponent": table.fitted_error_exponent,
        "fitted_count_exponent": table.fitted_count_exponent,
    })
    print(f"fitted error exponent {table.fitted_error_exponent:.6g}, count exponent {table.fitted_count_exponent:.6g}")
    return EXIT_OK


def cmd_curvature(cfg: dict, args) -> int:
    """Verdict failure when the required condition (default: rank) does not hold."""
    c = harness.load_chart(_need(cfg, "chart"))
    grid = _int(cfg.get("grid_per_axis", 9), "grid_per_axis")
    require = cfg.get("require", "rank")
    if require not in ("rank", "full", "none"):
        raise harness.ConfigError("require must be 'rank', 'full' or 'none'")
    try:
        rep = curvature.curvature_report(c, grid)
    except ValueError as exc:
        raise harness.ConfigError(str(exc)) from None
    records = []
    for res in (rep.condition_full, rep.condition_rank):
        d = res.to_dict()
        records.append({
            "condition": d["condition"], "verdict": d["verdict"], "witness": ";".join(d["witness"]),
            "grid_minimum": res.grid_minimum, "refined_minimum": res.refined_minimum,
            "exact": res.exact, "witnesses": "|".join(";".join(w) for w in d["witnesses"]),
        })
    _emit(args, CURVATURE_COLUMNS, records, {"report": rep.to_dict()})
    if require == "none":
        return EXIT_OK
    verdict = rep.condition_rank.verdict if require == "rank" else rep.condition_full.verdict
    return EXIT_OK if verdict == curvature.HOLDS else EXIT_VERDICT


def cmd_kernels(cfg: dict, args) -> int:
    Js = [_int(j, "J") for j in cfg.get("J", [5, 10, 50])]
    deltas = _floats(cfg.get("delta", [0.05, 0.1, 0.25]), "delta")
    Ts = _floats(cfg.get("T", [4, 10, 100]), "T")
    grid = _int(cfg.get("grid", 10_000), "grid")
    samples = _int(cfg.get("fejer_samples", 10_000), "fejer_samples")
    records, all_ok = [], True
    for J in Js:
        for d in deltas:
            try:
                chk = kernels.check_selberg(kernels.selberg_build(J, d), grid)
            except ValueError as exc:
                raise harness.ConfigError(str(exc)) from None
            ok = chk.ok()
            all_ok &= ok
            records.append({
                "kind": "selberg", "degree": J, "delta": d, "upper_slack": chk.min_upper_slack,
                "lower_slack": chk.min_lower_slack, "bounds_ok": chk.coefficient_bound_ok,
                "mean_error": max(chk.mean_plus_error, chk.mean_minus_error), "ok": ok,
            })
    for T in Ts:
        theta = np.linspace(-1.0 / T, 1.0 / T, samples)
        try:
            chk = kernels.fejer_majorant_check(T, theta)
        except ValueError as exc:
            raise harness.ConfigError(str(exc)) from None
        all_ok &= chk.ok
        records.append({
            "kind": "fejer", "degree": chk.D, "delta": 1.0 / T, "upper_slack": chk.min_slack,
            "lower_slack": "", "bounds_ok": "", "mean_error": "", "ok": chk.ok,
        })
    _emit(args, KERNEL_COLUMNS, records)
    return EXIT_OK if all_ok else EXIT_VERDICT


def cmd_legendre(cfg: dict, args) -> int:
    names = cfg.get("fixtures", ["diagonal_quadratic", "quartic"])
    points = int(cfg.get("points", 100))
    radius = float(cfg.get("radius", 0.5))
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    inv_tol = float(cfg.get("involution_tol", 1e-6))
    hess_tol = float(cfg.get("hessian_tol", 1e-4))
    records, all_ok = [], True
    for name in names:
        if name not in legendre.FIXTURES:
            raise harness.ConfigError(f"unknown Legendre fixture {name!r}; choose from {sorted(legendre.FIXTURES)}")
        F = legendre.FIXTURES[name]()
        for i in range(points):
            x = rng.uniform(-radius, radius, F.dim)
            z = F.gradient(x)
            inv = legendre.involution_residual(F, x)
            hes = legendre.hessian_identity_residual(F, z, x)
            ok = inv <= inv_tol and hes <= hess_tol
            all_ok &= ok
            records.append({
                "fixture": name, "index": i, "point": ";".join(f"{v:.17g}" for v in x),
                "involution_residual": inv, "hessian_residual": hes, "ok": ok,
            })
    _emit(args, LEGENDRE_COLUMNS, records)
    return EXIT_OK if all_ok else EXIT_VERDICT


def _phase(spec) -> PolynomialMap:
    if not isinstance(spec, dict) or "terms" not in spec:
        raise harness.ConfigError("phase must be {'n_vars': d, 'terms': [{'coeff': ..., 'exp': [...]}]}")
    try:
        return PolynomialMap.from_json(int(spec.get("n_vars", 1)), spec["terms"])
    except (ChartError, KeyError, TypeError) as exc:
        raise harness.ConfigError(f"bad phase: {exc}") from None


def cmd_oscillatory(cfg: dict, args) -> int:
    """Stationary probe when ``v0`` is given, otherwise a plain decay fit.

    Optional checks: ``max_slope`` (deviation slope with ``v0``, decay slope without)
    and ``max_deviation`` at ``deviation_lambda``.
    """
    phase = _phase(_need(cfg, "phase"))
    amp = cfg.get("amplitude")
    try:
        w = BumpWeight.from_dict(amp) if amp else oscillatory.standard_bump_1d()
    except (ChartError, ValueError) as exc:
        raise harness.ConfigError(f"bad amplitude: {exc}") from None
    lambdas = _floats(_need(cfg, "lambdas"), "lambdas")
    level = int(cfg.get("level", 1))
    v0 = cfg.get("v0")
    o = oscillatory.OscIntegrand(w, phase, lambdas[0])
    rows = oscillatory.stationary_probe(o, lambdas, v0, level)
    records = []
    for r in rows:
        m = r.main if r.main is not None else complex(math.nan, math.nan)
        v = r.result.value
        records.append({
            "lambda": r.lam, "re": v.real, "im": v.imag, "abs": abs(v),
            "error_estimate": r.result.error_estimate, "main_re": m.real, "main_im": m.imag,
        })
    ok, meta = True, {}
    if v0 is not None:
        slope, devs = oscillatory.deviation_fit(rows)
        meta.update(deviation_slope=slope, deviations=devs)
        if "max_deviation" in cfg:
            lam_ref = float(cfg.get("deviation_lambda", lambdas[len(lambdas) // 2]))
            idx = int(np.argmin([abs(l - lam_ref) for l in lambdas]))
            ok &= devs[idx] <= float(cfg["max_deviation"])
    else:
        by_lam = {r.lam: r.result for r in rows}
        fit = oscillatory.decay_fit(lambda lam: by_lam[lam], lambdas)
        slope = fit.slope
        meta.update(decay_slope=slope, dropped=[[l, why] for l, why in fit.dropped])
    if "max_slope" in cfg:
        ok &= slope <= float(cfg["max_slope"])
    _emit(args, OSCILLATORY_COLUMNS, records, meta)
    print(f"slope {slope:.6g}")
    return EXIT_OK if ok else EXIT_VERDICT


def cmd_serre(cfg: dict, args) -> int:
    c = harness.load_chart(_need(cfg, "chart"))
    qs = harness.q_list(_need(cfg, "Q"))
    rep = harness.serre_probe(c, qs)
    records = [
        {"Q": Q, "n_on_manifold": n, "fitted_slope": rep.slope,
         "corollary_exponent": format_rational(rep.corollary_exponent), "trivial_exponent": rep.trivial_exponent}
        for Q, n in zip(rep.Q, rep.counts)
    ]
    _emit(args, SERRE_COLUMNS, records, {"exceeds_trivial": rep.exceeds_trivial})
    print(f"on-manifold slope {rep.slope:.6g} (corollary {float(rep.corollary_exponent):.6g}, trivial {rep.trivial_exponent})")
    return EXIT_OK


COMMANDS = {
    "count": cmd_count,
    "sweep": cmd_sweep,
    "curvature": cmd_curvature,
    "kernels": cmd_kernels,
    "legendre": cmd_legendre,
    "oscillatory": cmd_oscillatory,
    "serre": cmd_serre,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nearpoints", description="Counting rational points near manifolds.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=(fn.__doc__ or "").split("\n")[0] or None)
        sp.add_argument("--config", required=True, help="JSON config document")
        sp.add_argument("--out", required=True, help="CSV output path")
        sp.add_argument("--json", default=None, help="optional JSON mirror of the CSV")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = json.loads(Path(args.config).read_text())
        if not isinstance(cfg, dict):
            raise harness.ConfigError("config must be a JSON object")
        return COMMANDS[args.command](cfg, args)
    except (OSError, json.JSONDecodeError, harness.ConfigError, harness.FitError, ChartError, CountError,
            oscillatory.OscillatoryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
