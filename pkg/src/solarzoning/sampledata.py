"""Generator for the packaged two-region demonstration dataset.

Running ``python3 -m solarzoning.sampledata`` rewrites the files under
``solarzoning/data/default``. Generation is fully seeded, so the shipped
files are reproducible from this module alone.

The landscape is an 8 x 7 grid of 6 km square subdivisions (56 total; the
western four columns form region R1, the eastern four R2). Zoning status is
assigned so that the dataset exercises every scenario mechanism:

* 16 subdivisions are unzoned (statewide default setbacks apply),
* of the 40 zoned ones, 18 are silent on utility-scale solar (de facto
  bans at baseline), 4 prohibit it outright, and 18 permit it subject to
  numeric setback and lot-size rules, and
* the silent set deliberately includes the sunniest grid-adjacent
  subdivisions, so restricting to ordinance-permitted land visibly degrades
  the buildable resource relative to the unregulated counterfactual.
"""

from __future__ import annotations

import argparse
import io
import random
from pathlib import Path

import numpy as np

from .io import atomic_write_text, write_csv, write_json
from .resource import (
    CostAssumptions,
    interconnection_cost,
    levelized_transmission_cost,
    synthetic_cf,
    TransmissionLine,
)
from .supply import SupplySite, top_fraction
from .zoning import OrdinanceRecord, serialize_ordinance_db

GRID_COLS = 8
GRID_ROWS = 7
CELL_M = 6000.0
SEED = 42
PERIODS = (2026, 2030, 2034, 2038, 2042)
TOP_SITE_FRACTION = 0.35

N_UNZONED = 16
N_SILENT_ELIGIBLE = 7
N_SILENT_OTHER = 11
N_OUTRIGHT_BANS = 4

_COST_ROWS = [
    # technology, period, capex, fom, vom, dr, lt, icx_km, icx_fixed, fuel, energy_capex
    ("solar", 2026, 1300.0, 18.0, 0.0, 0.06, 30.0, 4000.0, 20000.0, 0.0, ""),
    ("solar", 2030, 1280.0, 18.0, 0.0, 0.06, 30.0, 4000.0, 20000.0, 0.0, ""),
    ("solar", 2034, 1260.0, 18.0, 0.0, 0.06, 30.0, 4000.0, 20000.0, 0.0, ""),
    ("solar", 2038, 1240.0, 18.0, 0.0, 0.06, 30.0, 4000.0, 20000.0, 0.0, ""),
    ("solar", 2042, 1220.0, 18.0, 0.0, 0.06, 30.0, 4000.0, 20000.0, 0.0, ""),
    ("wind", 2026, 1500.0, 40.0, 0.0, 0.06, 25.0, 0.0, 0.0, 0.0, ""),
    ("wind", 2030, 1400.0, 40.0, 0.0, 0.06, 25.0, 0.0, 0.0, 0.0, ""),
    ("wind", 2034, 1320.0, 40.0, 0.0, 0.06, 25.0, 0.0, 0.0, 0.0, ""),
    ("wind", 2038, 1250.0, 40.0, 0.0, 0.06, 25.0, 0.0, 0.0, 0.0, ""),
    ("wind", 2042, 1180.0, 40.0, 0.0, 0.06, 25.0, 0.0, 0.0, 0.0, ""),
    ("ccgt", 2026, 1000.0, 25.0, 3.5, 0.06, 30.0, 0.0, 0.0, 28.0, ""),
    ("ccgt", 2030, 1000.0, 25.0, 3.5, 0.06, 30.0, 0.0, 0.0, 28.0, ""),
    ("ccgt", 2034, 1000.0, 25.0, 3.5, 0.06, 30.0, 0.0, 0.0, 28.0, ""),
    ("ccgt", 2038, 1000.0, 25.0, 3.5, 0.06, 30.0, 0.0, 0.0, 28.0, ""),
    ("ccgt", 2042, 1000.0, 25.0, 3.5, 0.06, 30.0, 0.0, 0.0, 28.0, ""),
    ("peaker", 2026, 650.0, 12.0, 4.5, 0.06, 25.0, 0.0, 0.0, 45.0, ""),
    ("peaker", 2030, 650.0, 12.0, 4.5, 0.06, 25.0, 0.0, 0.0, 45.0, ""),
    ("peaker", 2034, 650.0, 12.0, 4.5, 0.06, 25.0, 0.0, 0.0, 45.0, ""),
    ("peaker", 2038, 650.0, 12.0, 4.5, 0.06, 25.0, 0.0, 0.0, 45.0, ""),
    ("peaker", 2042, 650.0, 12.0, 4.5, 0.06, 25.0, 0.0, 0.0, 45.0, ""),
    ("storage", 2026, 400.0, 10.0, 0.0, 0.06, 15.0, 0.0, 0.0, 0.0, 300.0),
    ("storage", 2030, 380.0, 10.0, 0.0, 0.06, 15.0, 0.0, 0.0, 0.0, 280.0),
    ("storage", 2034, 360.0, 10.0, 0.0, 0.06, 15.0, 0.0, 0.0, 0.0, 260.0),
    ("storage", 2038, 340.0, 10.0, 0.0, 0.06, 15.0, 0.0, 0.0, 0.0, 240.0),
    ("storage", 2042, 320.0, 10.0, 0.0, 0.06, 15.0, 0.0, 0.0, 0.0, 220.0),
]

_PERMISSIVE_VARIANTS: list[tuple[float, float, float, float | None, float | None]] = [
    (20.0, 15.0, 30.0, None, None),
    (25.0, 15.0, 45.0, None, None),
    (30.0, 20.0, 60.0, None, None),
    (25.0, 20.0, 45.0, 800000.0, None),
    (30.0, 30.0, 75.0, 1000000.0, None),
    (20.0, 15.0, 45.0, None, 1500000.0),
    (25.0, 30.0, 60.0, 800000.0, 1200000.0),
]

PARCEL_SIZES = [
    650000.0, 800000.0, 950000.0, 1100000.0, 1300000.0,
    1500000.0, 1750000.0, 2000000.0, 2300000.0, 2600000.0,
]

GROWTH = {2026: 1.0, 2030: 1.07, 2034: 1.15, 2038: 1.22, 2042: 1.3}
AVG_DEMAND_MW = {"R1": 1200.0, "R2": 900.0}


def _subdivision_ids() -> list[tuple[str, int, int]]:
    out = []
    idx = 1
    for row in range(GRID_ROWS):
        for col in range(GRID_COLS):
            out.append((f"SUB{idx:02d}", col, row))
            idx += 1
    return out


def _cell_ring(col: int, row: int) -> list[list[float]]:
    x0, y0 = col * CELL_M, row * CELL_M
    x1, y1 = x0 + CELL_M, y0 + CELL_M
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]


def _region_of(col: int) -> str:
    return "R1" if col < GRID_COLS // 2 else "R2"


def _transmission_lines() -> list[tuple[str, list[list[float]]]]:
    height = GRID_ROWS * CELL_M
    width = GRID_COLS * CELL_M
    return [
        ("T1", [[9000.0, -2000.0], [9000.0, height + 2000.0]]),
        ("T2", [[39000.0, -2000.0], [39000.0, height + 2000.0]]),
        ("T3", [[-2000.0, 21000.0], [width + 2000.0, 21000.0]]),
    ]


def _roads(rng: random.Random) -> list[tuple[str, list[list[float]]]]:
    width = GRID_COLS * CELL_M
    height = GRID_ROWS * CELL_M
    lines: list[tuple[str, list[list[float]]]] = []
    for col in range(GRID_COLS + 1):
        x = col * CELL_M
        lines.append((f"road-v{col}", [[x, 0.0], [x, height]]))
    for row in range(GRID_ROWS + 1):
        y = row * CELL_M
        lines.append((f"road-h{row}", [[0.0, y], [width, y]]))
    offsets = (2000.0, 2500.0, 3000.0, 3500.0, 4000.0)
    for sid, col, row in _subdivision_ids():
        x0, y0 = col * CELL_M, row * CELL_M
        if rng.random() < 0.7:
            x = x0 + rng.choice(offsets)
            lines.append((f"road-{sid}-v", [[x, y0], [x, y0 + CELL_M]]))
        if rng.random() < 0.5:
            y = y0 + rng.choice(offsets)
            lines.append((f"road-{sid}-h", [[x0, y], [x0 + CELL_M, y]]))
    return lines


def _exclusion_rings(rng: random.Random) -> list[list[list[float]]]:
    rings = []
    for _ in range(6):
        col = rng.randrange(GRID_COLS)
        row = rng.randrange(GRID_ROWS)
        cx = col * CELL_M + rng.uniform(1500.0, 4500.0)
        cy = row * CELL_M + rng.uniform(1500.0, 4500.0)
        w = rng.uniform(900.0, 2100.0)
        h = rng.uniform(900.0, 2600.0)
        rings.append([
            [cx - w / 2, cy - h / 2], [cx + w / 2, cy - h / 2],
            [cx + w / 2, cy + h / 2], [cx - w / 2, cy + h / 2],
            [cx - w / 2, cy - h / 2],
        ])
    # one triangle, to keep exclusion shapes from all being axis-aligned
    rings.append([[20500.0, 8200.0], [23400.0, 9100.0], [21300.0, 11600.0],
                  [20500.0, 8200.0]])
    return rings


def _geojson(features: list[dict]) -> dict:
    return {"type": "FeatureCollection", "features": features}


def _line_feature(line_id: str, coords: list[list[float]]) -> dict:
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {"id": line_id},
    }


def _demand_column(rng: np.random.Generator, avg_mw: float) -> np.ndarray:
    hours = np.arange(8760)
    day = hours // 24
    hod = hours % 24
    dow = day % 7
    daily = 1.0 + 0.18 * np.sin(2.0 * np.pi * (hod - 9.0) / 24.0)
    seasonal = 1.0 + 0.12 * np.cos(2.0 * np.pi * (day - 200.0) / 365.0)
    weekday = np.where(dow < 5, 1.0, 0.93)
    noise = 1.0 + 0.02 * np.clip(rng.standard_normal(8760), -3.0, 3.0)
    return np.round(avg_mw * daily * seasonal * weekday * noise, 3)


def _ordinance_records(dest_notes: dict) -> list[OrdinanceRecord]:
    """Assign zoning status across the grid as documented in the module doc."""
    subs = _subdivision_ids()
    lines = [
        TransmissionLine(line_id, np.asarray(coords))
        for line_id, coords in _transmission_lines()
    ]
    solar_2026 = CostAssumptions(
        capex_usd_per_kw=1300.0, fixed_om_usd_per_kw_yr=18.0,
        variable_om_usd_per_mwh=0.0, discount_rate=0.06, lifetime_yr=30.0,
        interconnect_usd_per_mw_km=4000.0, interconnect_fixed_usd_per_mw=20000.0,
    )
    character = {}
    placeholder_sites = []
    for sid, col, row in subs:
        centroid = (col * CELL_M + CELL_M / 2, row * CELL_M + CELL_M / 2)
        cf = synthetic_cf(centroid, SEED, sid)
        icx = interconnection_cost(centroid, lines, solar_2026)
        lcot = levelized_transmission_cost(cf.mean_cf, solar_2026, icx)
        character[sid] = (cf.mean_cf, lcot)
        placeholder_sites.append(SupplySite(
            subdivision_id=sid, region_id=_region_of(col), capacity_mw=0.0,
            lcoe_usd_per_mwh=0.0, cf=cf, lcot_usd_per_mwh=lcot,
        ))
    eligible = sorted(
        s.subdivision_id for s in top_fraction(placeholder_sites, TOP_SITE_FRACTION)
    )

    rng = random.Random(f"zoning-assignment:{SEED}")
    by_cf_desc = sorted(eligible, key=lambda sid: (-character[sid][0], sid))
    silent = set(by_cf_desc[:N_SILENT_ELIGIBLE])
    non_eligible = sorted(set(sid for sid, _, _ in subs) - set(eligible))
    silent.update(rng.sample(non_eligible, N_SILENT_OTHER))
    remaining = sorted(set(non_eligible) - silent)
    bans = set(rng.sample(remaining, N_OUTRIGHT_BANS))
    remaining = sorted((set(sid for sid, _, _ in subs) - silent) - bans)
    unzoned = set(rng.sample(remaining, N_UNZONED))

    records = []
    for sid, _, _ in subs:
        if sid in unzoned:
            records.append(OrdinanceRecord(jurisdiction_id=sid, zoned=False))
        elif sid in silent:
            records.append(OrdinanceRecord(jurisdiction_id=sid, zoned=True, silent=True))
        elif sid in bans:
            records.append(OrdinanceRecord(
                jurisdiction_id=sid, zoned=True, allows_ses_in_ag=False,
            ))
        else:
            road, ppl, nppl, min_lot, max_lot = rng.choice(_PERMISSIVE_VARIANTS)
            records.append(OrdinanceRecord(
                jurisdiction_id=sid, zoned=True, allows_ses_in_ag=True,
                road_setback_m=road, ppl_setback_m=ppl, nppl_setback_m=nppl,
                min_lot_size_m2=min_lot, max_lot_size_m2=max_lot,
            ))
    dest_notes["eligible"] = eligible
    dest_notes["silent_eligible"] = sorted(silent & set(eligible))
    return records


_CONFIG_TEMPLATE = """\
name: default
seed: {seed}
scenario: baseline
paths:
  subdivisions: subdivisions.geojson
  roads: roads.geojson
  transmission: transmission.geojson
  exclusions: exclusions.geojson
  ordinances: ordinances.csv
  costs: costs.csv
  regions: regions.csv
  demand: demand.csv
  demand_growth: demand_growth.csv
  existing_fleet: existing_fleet.csv
  corridors: corridors.csv
  parcel_sizes: parcel_sizes.csv
parcels:
  participation_rate: 0.8
supply:
  power_density_w_per_m2: 35.0
  wind_power_density_w_per_m2: 0.8
  top_site_fraction: {top_fraction}
expansion:
  periods: [2026, 2030, 2034, 2038, 2042]
  reserve_margin: 0.15
  solar_share_target: 0.1
  days_per_season: 2
  myopic: false
  tx_discount_rate: 0.05
  tx_lifetime_yr: 40.0
"""


def generate(dest: Path) -> dict:
    """Write the complete demonstration dataset into ``dest``."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    notes: dict = {}

    features = []
    for sid, col, row in _subdivision_ids():
        features.append({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [_cell_ring(col, row)]},
            "properties": {"subdivision_id": sid, "region_id": _region_of(col)},
        })
    write_json(dest / "subdivisions.geojson", _geojson(features))

    road_rng = random.Random(f"roads:{SEED}")
    write_json(dest / "roads.geojson", _geojson([
        _line_feature(line_id, coords) for line_id, coords in _roads(road_rng)
    ]))
    write_json(dest / "transmission.geojson", _geojson([
        _line_feature(line_id, coords) for line_id, coords in _transmission_lines()
    ]))

    excl_rng = random.Random(f"exclusions:{SEED}")
    write_json(dest / "exclusions.geojson", _geojson([
        {
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {"id": f"excl{k}"},
        }
        for k, ring in enumerate(_exclusion_rings(excl_rng))
    ]))

    records = _ordinance_records(notes)
    buffer = io.StringIO()
    serialize_ordinance_db(records, buffer)
    atomic_write_text(dest / "ordinances.csv", buffer.getvalue())

    write_csv(
        dest / "costs.csv",
        ("technology", "period", "capex_usd_per_kw", "fixed_om_usd_per_kw_yr",
         "variable_om_usd_per_mwh", "discount_rate", "lifetime_yr",
         "interconnect_usd_per_mw_km", "interconnect_fixed_usd_per_mw",
         "fuel_usd_per_mwh", "energy_capex_usd_per_kwh"),
        _COST_ROWS,
    )

    write_csv(
        dest / "regions.csv",
        ("region_id", "centroid_x_m", "centroid_y_m"),
        [("R1", 12000.0, 21000.0), ("R2", 36000.0, 21000.0)],
    )

    demand_rng = np.random.default_rng(np.random.SeedSequence([SEED, 0xDE3A]))
    columns = {rid: _demand_column(demand_rng, avg) for rid, avg in AVG_DEMAND_MW.items()}
    rows = [
        (h, columns["R1"][h], columns["R2"][h]) for h in range(8760)
    ]
    write_csv(dest / "demand.csv", ("hour", "R1", "R2"), rows)
    write_csv(
        dest / "demand_growth.csv",
        ("period", "multiplier"),
        [(p, GROWTH[p]) for p in PERIODS],
    )

    write_csv(
        dest / "existing_fleet.csv",
        ("region_id", "technology", "capacity_mw", "vom_usd_per_mwh", "fuel_usd_per_mwh"),
        [
            ("R1", "ccgt", 1200.0, "", ""),
            ("R1", "coal", 800.0, 4.5, 21.0),
            ("R1", "peaker", 300.0, "", ""),
            ("R2", "ccgt", 700.0, "", ""),
            ("R2", "peaker", 250.0, "", ""),
            ("R2", "wind", 150.0, "", ""),
        ],
    )

    write_csv(
        dest / "corridors.csv",
        ("region_a", "region_b", "existing_capacity_mw", "cost_usd_per_mw", "expandable"),
        [("R1", "R2", 500.0, 150000.0, "true")],
    )

    write_csv(dest / "parcel_sizes.csv", ("area_m2",), [(s,) for s in PARCEL_SIZES])

    atomic_write_text(dest / "config.yaml", _CONFIG_TEMPLATE.format(
        seed=SEED, top_fraction=TOP_SITE_FRACTION,
    ))
    return notes


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        description="Regenerate the packaged demonstration dataset."
    )
    default_dest = Path(__file__).resolve().parent / "data" / "default"
    parser.add_argument("--dest", type=Path, default=default_dest)
    args = parser.parse_args(argv)
    notes = generate(args.dest)
    print(f"dataset written to {args.dest}")
    print(f"grid-eligible subdivisions: {', '.join(notes['eligible'])}")
    print(f"silent among eligible: {', '.join(notes['silent_eligible'])}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
