"""Serialization helpers and the packaged demo-region loaders."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from solarzoning.config import default_config_path
from solarzoning.errors import ConfigError
from solarzoning.io import (
    atomic_write_text,
    format_cell,
    load_costs,
    load_demand,
    load_regions,
    load_subdivisions,
    storage_energy_capex,
    write_csv,
    write_json,
)

DATA_DIR = default_config_path().parent


def test_format_cell_floats_use_shortest_repr():
    assert format_cell(0.1) == "0.1"
    assert format_cell(np.float64(0.1)) == "0.1"
    assert format_cell(1.0) == "1.0"
    assert format_cell(12480.600000000002) == "12480.600000000002"


def test_format_cell_bools_and_integers():
    assert format_cell(True) == "true"
    assert format_cell(np.bool_(False)) == "false"
    assert format_cell(np.int64(7)) == "7"
    assert format_cell(7) == "7"
    assert format_cell("SUB01") == "SUB01"


def test_write_csv_is_byte_stable(tmp_path):
    rows = [["a", np.float64(1.5), True], ["b", 2.0, np.bool_(False)]]
    first = tmp_path / "one.csv"
    second = tmp_path / "two.csv"
    write_csv(first, ["id", "value", "flag"], rows)
    write_csv(second, ["id", "value", "flag"], rows)
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text() == "id,value,flag\na,1.5,true\nb,2.0,false\n"


def test_write_json_sorts_keys(tmp_path):
    path = tmp_path / "out.json"
    write_json(path, {"zulu": 1, "alpha": {"b": 2, "a": 3}})
    payload = path.read_text()
    assert payload.index('"alpha"') < payload.index('"zulu"')
    assert json.loads(payload) == {"zulu": 1, "alpha": {"b": 2, "a": 3}}
    assert payload.endswith("\n")


def test_atomic_write_replaces_and_leaves_no_droppings(tmp_path):
    target = tmp_path / "nested" / "file.txt"
    atomic_write_text(target, "first")
    atomic_write_text(target, "second")
    assert target.read_text() == "second"
    assert [p.name for p in target.parent.iterdir()] == ["file.txt"]


def test_missing_input_names_the_path(tmp_path):
    ghost = tmp_path / "absent.csv"
    with pytest.raises(ConfigError, match="absent.csv"):
        load_costs(ghost)


def test_demo_subdivisions_load_sorted():
    subs = load_subdivisions(DATA_DIR / "subdivisions.geojson")
    ids = [s.subdivision_id for s in subs]
    assert len(ids) == 56
    assert ids == sorted(ids)
    assert len(set(ids)) == 56
    for sub in subs:
        assert sub.ring.shape[1] == 2
        assert sub.region_id in {"R1", "R2"}
        # 6 km grid cells: exact area, centroid inside the ring's bbox.
        assert sub.area_m2 == pytest.approx(6000.0 * 6000.0)
        cx, cy = sub.centroid
        assert sub.ring[:, 0].min() < cx < sub.ring[:, 0].max()
        assert sub.ring[:, 1].min() < cy < sub.ring[:, 1].max()


def test_demo_costs_cover_all_periods():
    costs = load_costs(DATA_DIR / "costs.csv")
    periods = (2026, 2030, 2034, 2038, 2042)
    for tech in ("solar", "wind", "ccgt", "storage"):
        assert set(costs[tech]) == set(periods), tech
    energy = storage_energy_capex(costs)
    assert set(energy) == set(periods)
    assert all(v > 0 for v in energy.values())
    # Declining solar capex keeps later vintages attractive.
    solar_capex = [costs["solar"][p].capex_usd_per_kw for p in periods]
    assert solar_capex == sorted(solar_capex, reverse=True)


def test_demo_demand_has_full_years():
    regions = [r[0] for r in load_regions(DATA_DIR / "regions.csv")]
    assert regions == ["R1", "R2"]
    periods = [2026, 2030, 2034, 2038, 2042]
    demand = load_demand(
        DATA_DIR / "demand.csv", DATA_DIR / "demand_growth.csv", regions, periods
    )
    for region_id in regions:
        assert set(demand[region_id]) == set(periods)
        for period in periods:
            series = demand[region_id][period]
            assert series.shape == (8760,)
            assert float(series.min()) > 0
        # Growth factors scale the base year without reshaping it.
        base = demand[region_id][2026]
        final = demand[region_id][2042]
        ratio = final / base
        assert float(ratio.max()) - float(ratio.min()) < 1e-9
        assert float(ratio.mean()) > 1.0


def test_loaders_reject_duplicate_keys(tmp_path):
    costs_csv = tmp_path / "costs.csv"
    header = (
        "technology,period,capex_usd_per_kw,fixed_om_usd_per_kw_yr,"
        "variable_om_usd_per_mwh,discount_rate,lifetime_yr,fuel_usd_per_mwh\n"
    )
    row = "ccgt,2030,1000,25,3.5,0.06,30,28\n"
    costs_csv.write_text(header + row + row)
    with pytest.raises(Exception, match="duplicate"):
        load_costs(costs_csv)
