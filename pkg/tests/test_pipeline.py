"""End-to-end runs: artifact files, reproducibility, comparisons, CLI."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import pytest

from solarzoning.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, main
from solarzoning.errors import DimensionMismatchError
from solarzoning.pipeline import COMPARE_METRICS, compare_runs, delta_percent, run
from solarzoning.resource import crf

EXPECTED_FILES = {
    "supply_curve.csv",
    "waterfall.csv",
    "investments.csv",
    "plan.json",
    "run_metadata.json",
    "supply_curves.svg",
    "capacity_bars.svg",
    "parcels.geojson",
}


def test_run_writes_the_full_artifact_set(run_pair):
    for scenario, (_, out_dir) in run_pair.items():
        names = {p.name for p in Path(out_dir).iterdir()}
        assert names == EXPECTED_FILES, scenario


def test_runs_are_byte_reproducible(run_pair, demo_config, tmp_path):
    _, first_dir = run_pair["baseline"]
    cfg = demo_config.with_overrides(scenario="baseline", solar_share_target=0.10)
    repeat_dir = tmp_path / "repeat"
    run(cfg, repeat_dir)
    for name in sorted(EXPECTED_FILES):
        original = (Path(first_dir) / name).read_bytes()
        repeated = (repeat_dir / name).read_bytes()
        assert original == repeated, name


def test_metadata_is_location_independent(run_pair):
    for scenario, (_, out_dir) in run_pair.items():
        payload = json.loads((Path(out_dir) / "run_metadata.json").read_text())
        blob = json.dumps(payload)
        assert str(out_dir) not in blob, scenario
        assert "/tmp" not in blob and "/root" not in blob, scenario


def test_delta_percent_edge_cases():
    assert delta_percent(0.0, 0.0) == 0.0
    assert math.isinf(delta_percent(0.0, 5.0))
    assert delta_percent(100.0, 150.0) == pytest.approx(50.0)
    assert delta_percent(200.0, 150.0) == pytest.approx(-25.0)


def test_compare_runs_tabulates_known_metrics(run_pair, tmp_path):
    _, unregulated_dir = run_pair["unregulated"]
    _, baseline_dir = run_pair["baseline"]
    out_csv = tmp_path / "comparison.csv"
    rows = compare_runs(unregulated_dir, baseline_dir, out_csv)
    assert [name for name, *_ in rows] == list(COMPARE_METRICS)
    for name, value_a, value_b, delta in rows:
        assert delta == pytest.approx(delta_percent(value_a, value_b), rel=1e-12), name
    by_name = {name: (a, b) for name, a, b, _ in rows}
    # Stricter zoning costs more and needs more nameplate for the same share.
    assert by_name["objective_usd"][1] > by_name["objective_usd"][0]
    assert by_name["solar_built_mw"][1] > by_name["solar_built_mw"][0]
    assert by_name["unregulated_mw"][0] == pytest.approx(by_name["unregulated_mw"][1])
    with out_csv.open(newline="") as handle:
        parsed = list(csv.DictReader(handle))
    assert len(parsed) == len(COMPARE_METRICS)
    for record, (name, value_a, value_b, delta) in zip(parsed, rows):
        assert record["metric"] == name
        assert float(record["value_a"]) == pytest.approx(value_a, rel=1e-12)
        assert float(record["delta_pct"]) == pytest.approx(delta, rel=1e-12)


def test_compare_rejects_mismatched_periods(run_pair, tmp_path):
    _, baseline_dir = run_pair["baseline"]
    mangled = tmp_path / "mangled"
    mangled.mkdir()
    for name in ("plan.json", "run_metadata.json"):
        (mangled / name).write_text((Path(baseline_dir) / name).read_text())
    plan = json.loads((mangled / "plan.json").read_text())
    plan["periods"] = plan["periods"][:-1]
    (mangled / "plan.json").write_text(json.dumps(plan))
    with pytest.raises(DimensionMismatchError, match="periods"):
        compare_runs(baseline_dir, mangled)


def test_investment_costs_follow_the_vintage_annuity(run_pair):
    artifacts, out_dir = run_pair["baseline"]
    problem = artifacts.problem
    solar_icx = {
        f"solar:{s.subdivision_id}": s.interconnect_usd_per_mw
        for s in problem.solar_sites
    }
    with (Path(out_dir) / "investments.csv").open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert rows, "a binding share target must build something"
    checked = 0
    for row in rows:
        tech = row["technology"]
        if not tech.startswith("solar:"):
            continue
        period = int(row["period"])
        mw = float(row["built_mw"])
        costs = problem.solar_costs[period]
        expected = crf(costs.discount_rate, costs.lifetime_yr) * (
            costs.capex_usd_per_kw * 1000.0 + solar_icx[tech]
        ) * mw
        assert float(row["annualized_cost_usd"]) == pytest.approx(expected, rel=1e-9)
        checked += 1
    assert checked > 0
    build_total = sum(
        float(r["built_mw"]) for r in rows if r["technology"].startswith("solar:")
    )
    assert build_total == pytest.approx(artifacts.result.solar_built_mw, rel=1e-9)


def test_cli_run_rejects_bad_config(tmp_path, capsys):
    missing = tmp_path / "no-such-config.yaml"
    code = main(["run", "--config", str(missing), "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_cli_run_reports_infeasible_targets(tmp_path, capsys):
    code = main([
        "run", "--target", "0.95", "--out", str(tmp_path / "out"),
    ])
    assert code == EXIT_INFEASIBLE
    err = capsys.readouterr().err
    assert "share" in err
    assert "max_share" in err


def test_cli_compare_prints_and_writes(run_pair, tmp_path, capsys):
    _, unregulated_dir = run_pair["unregulated"]
    _, baseline_dir = run_pair["baseline"]
    out_csv = tmp_path / "cmp.csv"
    code = main([
        "compare", str(unregulated_dir), str(baseline_dir), "--out", str(out_csv),
    ])
    assert code == EXIT_OK
    captured = capsys.readouterr().out
    assert "objective_usd" in captured
    assert out_csv.exists()


def test_cli_geometry_debug_writes_geojson(tmp_path, capsys):
    out_dir = tmp_path / "geo"
    code = main(["geometry-debug", "--subdivision", "SUB01", "--out", str(out_dir)])
    assert code == EXIT_OK
    for name in ("parcels.geojson", "developable.geojson"):
        payload = json.loads((out_dir / name).read_text())
        assert payload["type"] == "FeatureCollection"
        assert payload["features"]
    assert "SUB01" in capsys.readouterr().out


def test_cli_rejects_unknown_subdivision(tmp_path, capsys):
    code = main([
        "geometry-debug", "--subdivision", "SUB99", "--out", str(tmp_path / "geo"),
    ])
    assert code == EXIT_CONFIG
    assert "SUB99" in capsys.readouterr().err
