import csv
import json
from pathlib import Path

import pytest

from nearpoints import cli

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _run(tmp_path, command, cfg, with_json=True):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg) if isinstance(cfg, dict) else cfg)
    out, js = tmp_path / "out.csv", tmp_path / "out.json"
    argv = [command, "--config", str(cfg_path), "--out", str(out)]
    if with_json:
        argv += ["--json", str(js)]
    code = cli.main(argv)
    rows = list(csv.DictReader(out.open())) if out.exists() else None
    header = out.read_text().splitlines()[0].split(",") if out.exists() else None
    doc = json.loads(js.read_text()) if with_json and js.exists() else None
    return code, header, rows, doc


def _same(rows, doc):
    # the JSON mirror carries the same values as the CSV, cell for cell
    assert len(rows) == len(doc["rows"])
    for r, d in zip(rows, doc["rows"]):
        for key, text in r.items():
            v = d[key]
            if isinstance(v, bool):
                assert text == str(v)
            elif isinstance(v, (int, float)):
                assert float(text) == v
            else:
                assert text == str(v)


CASES = [
    ("count", {"chart": "A", "Q": [8, 12], "delta": ["0", "1/4", "1/2"]}, cli.COUNT_COLUMNS, 6),
    ("sweep", {"chart": "B", "Q": [10, 20, 30], "delta_schedule": {"A": "1/2", "beta": "0"}},
     None, 3),
    ("curvature", {"chart": "A", "grid_per_axis": 9}, cli.CURVATURE_COLUMNS, None),
    ("kernels", {"J": [5], "delta": [0.1], "T": [10], "grid": 2000, "fejer_samples": 500},
     cli.KERNEL_COLUMNS, 2),
    ("legendre", {"fixtures": ["quartic"], "points": 5}, cli.LEGENDRE_COLUMNS, 5),
    ("oscillatory", {"phase": {"n_vars": 1, "terms": [{"coeff": "1", "exp": [2]}]},
                     "lambdas": [16, 32, 64, 128], "v0": [0.0], "max_slope": -0.8}, cli.OSCILLATORY_COLUMNS, 4),
    ("serre", {"chart": "linear", "Q": [10, 20, 30]}, cli.SERRE_COLUMNS, 3),
]


@pytest.mark.parametrize("command,cfg,columns,n_rows", CASES, ids=[c[0] for c in CASES])
def test_subcommand_success(tmp_path, command, cfg, columns, n_rows):
    code, header, rows, doc = _run(tmp_path, command, cfg)
    assert code == cli.EXIT_OK
    if columns is None:
        from nearpoints.harness import SWEEP_COLUMNS as columns
    assert header == columns
    if n_rows is not None:
        assert len(rows) == n_rows
    _same(rows, doc)


def test_json_is_optional(tmp_path):
    code, header, rows, doc = _run(tmp_path, "serre", {"chart": "linear", "Q": [10, 20, 30]}, with_json=False)
    assert code == 0 and doc is None and len(rows) == 3


def test_count_values(tmp_path):
    from fractions import Fraction
    from nearpoints.chart import default_weight
    from nearpoints.counting import count
    from nearpoints.fixtures import chart_a
    _, _, rows, _ = _run(tmp_path, "count", {"chart": "A", "Q": [12], "delta": ["1/4"]})
    r = count(chart_a(), default_weight(chart_a()), 12, Fraction(1, 4))
    assert int(rows[0]["n_unweighted"]) == r.n_unweighted
    assert float(rows[0]["n_weighted"]) == r.n_weighted
    assert rows[0]["delta"] == "1/4"


@pytest.mark.parametrize("command,cfg", [
    ("count", {"chart": "A"}),
    ("count", {"chart": "A", "Q": [5], "delta": ["3/4"]}),
    ("sweep", {"chart": "A", "Q": [4, 8], "delta_schedule": {"A": "1", "beta": "1/4"}}),
    ("sweep", {"chart": "Z", "Q": [4, 8, 9]}),
    ("serre", {"chart": "linear", "Q": [10]}),
    ("oscillatory", {"lambdas": [16, 32, 64]}),
    ("kernels", {"delta": ["a"]}),
    ("curvature", {"chart": "A", "grid_per_axis": 3}),
    ("kernels", {"J": ["x"]}),
    ("count", "not json"),
    ("count", "[1, 2]"),
])
def test_config_errors_exit_2(tmp_path, command, cfg):
    assert _run(tmp_path, command, cfg)[0] == cli.EXIT_CONFIG


def test_missing_config_file_exits_2(tmp_path):
    assert cli.main(["count", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o.csv")]) == 2


def test_verdict_failures_exit_3(tmp_path):
    # CHART-C is degenerate at its centre, so the rank condition cannot hold
    code, _, rows, _ = _run(tmp_path, "curvature", {"chart": "C", "grid_per_axis": 9})
    assert code == cli.EXIT_VERDICT
    assert rows[0]["verdict"] != "holds"
    # a linear phase decays fast; demanding it grow is a failed verdict
    osc = {"phase": {"n_vars": 1, "terms": [{"coeff": "1", "exp": [1]}]}, "lambdas": [16, 32, 64, 128],
           "max_slope": -20}
    assert _run(tmp_path, "oscillatory", osc)[0] == cli.EXIT_VERDICT
    leg = {"fixtures": ["quartic"], "points": 5, "hessian_tol": 1e-30}
    assert _run(tmp_path, "legendre", leg)[0] == cli.EXIT_VERDICT


def test_curvature_require_none(tmp_path):
    code, _, _, _ = _run(tmp_path, "curvature", {"chart": "C", "grid_per_axis": 9, "require": "none"})
    assert code == cli.EXIT_OK


@pytest.mark.parametrize("name", ["count_chart_a", "curvature_chart_a", "legendre", "serre_linear",
                                  "oscillatory_stationary", "oscillatory_nonstationary"])
def test_shipped_configs_run(tmp_path, name):
    out = tmp_path / "o.csv"
    assert cli.main([name.split("_")[0], "--config", str(CONFIGS / f"{name}.json"), "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_bad_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as e:
        cli.main(["frobnicate", "--config", "x", "--out", "y"])
    assert e.value.code == 2
