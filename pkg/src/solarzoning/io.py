"""Input readers and deterministic artifact writers (CSV, JSON, GeoJSON).

All artifact writers are atomic (write to a sibling temp file, then rename)
and format floats with ``repr`` so identical inputs produce byte-identical
files.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, ValidationError
from .expansion.model import Region, TransmissionCorridor
from .parcels import ExclusionMask, Parcel
from .resource import HOURS_PER_YEAR, CostAssumptions, TransmissionLine

# ---------------------------------------------------------------------------
# atomic writers


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: Path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=1) + "\n")


# ---------------------------------------------------------------------------
# GeoJSON


def _load_geojson(path: Path) -> list[tuple[dict, dict]]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"input file not found: {path}")
    data = json.loads(path.read_text())
    if data.get("type") != "FeatureCollection":
        raise ValidationError(f"{path}: expected a FeatureCollection")
    out = []
    for feature in data.get("features", []):
        out.append((feature.get("geometry") or {}, feature.get("properties") or {}))
    return out


@dataclass
class Subdivision:
    """One jurisdiction's land area (ring in meters) and its demand region."""

    subdivision_id: str
    region_id: str
    ring: np.ndarray

    @property
    def centroid(self) -> tuple[float, float]:
        ring = self.ring
        x = ring[:, 0]
        y = ring[:, 1]
        shift = np.roll(np.arange(ring.shape[0]), -1)
        cross = x * y[shift] - x[shift] * y
        area6 = 3.0 * float(cross.sum())
        if area6 == 0:
            return float(x.mean()), float(y.mean())
        cx = float(((x + x[shift]) * cross).sum() / area6)
        cy = float(((y + y[shift]) * cross).sum() / area6)
        return cx, cy

    @property
    def area_m2(self) -> float:
        x = self.ring[:, 0]
        y = self.ring[:, 1]
        return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def _polygon_ring(geometry: dict, where: str) -> np.ndarray:
    if geometry.get("type") != "Polygon":
        raise ValidationError(f"{where}: expected Polygon geometry")
    rings = geometry.get("coordinates") or []
    if not rings:
        raise ValidationError(f"{where}: empty polygon")
    ring = np.asarray(rings[0], dtype=np.float64)
    if ring.shape[0] >= 2 and np.allclose(ring[0], ring[-1]):
        ring = ring[:-1]
    return ring


def load_subdivisions(path: Path) -> list[Subdivision]:
    out = []
    for geometry, props in _load_geojson(path):
        sid = props.get("subdivision_id") or props.get("jurisdiction_id")
        region = props.get("region_id")
        if not sid or not region:
            raise ValidationError(
                f"{path}: every subdivision needs subdivision_id and region_id"
            )
        out.append(Subdivision(str(sid), str(region), _polygon_ring(geometry, sid)))
    ids = [s.subdivision_id for s in out]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{path}: duplicate subdivision ids")
    return sorted(out, key=lambda s: s.subdivision_id)


def load_polylines(path: Path) -> list[tuple[str, np.ndarray]]:
    """Load LineString/MultiLineString features as (id, polyline) pairs."""
    out = []
    for k, (geometry, props) in enumerate(_load_geojson(path)):
        gid = str(props.get("id") or props.get("line_id") or f"line{k}")
        gtype = geometry.get("type")
        if gtype == "LineString":
            parts = [geometry["coordinates"]]
        elif gtype == "MultiLineString":
            parts = list(geometry["coordinates"])
        else:
            raise ValidationError(f"{path}: feature {gid!r} is not a line")
        for j, coords in enumerate(parts):
            name = gid if len(parts) == 1 else f"{gid}.{j}"
            out.append((name, np.asarray(coords, dtype=np.float64)))
    return out


def load_exclusions(path: Path) -> ExclusionMask:
    rings = []
    for geometry, props in _load_geojson(path):
        gtype = geometry.get("type")
        if gtype == "Polygon":
            rings.append(_polygon_ring(geometry, str(props.get("id", "exclusion"))))
        elif gtype == "MultiPolygon":
            for poly in geometry.get("coordinates") or []:
                ring = np.asarray(poly[0], dtype=np.float64)
                if ring.shape[0] >= 2 and np.allclose(ring[0], ring[-1]):
                    ring = ring[:-1]
                rings.append(ring)
        else:
            raise ValidationError(f"{path}: exclusions must be polygons")
    return ExclusionMask(rings)


def load_transmission(path: Path) -> list[TransmissionLine]:
    return [
        TransmissionLine(line_id, polyline)
        for line_id, polyline in load_polylines(path)
    ]


def parcels_to_geojson(parcels: Sequence[Parcel]) -> dict:
    features = []
    for parcel in parcels:
        coords = parcel.ring.tolist()
        coords.append(coords[0])
        features.append({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [coords]},
            "properties": {
                "parcel_id": parcel.parcel_id,
                "subdivision_id": parcel.subdivision_id,
                "area_m2": parcel.area_m2,
                "edge_classes": [c.value for c in parcel.edge_classes],
            },
        })
    return {"type": "FeatureCollection", "features": features}


def developable_to_geojson(entries: Sequence[tuple[str, str, object]]) -> dict:
    """Features for (subdivision_id, parcel_id, DevelopableArea) triples."""
    features = []
    for subdivision_id, parcel_id, dev in entries:
        for k, ring in enumerate(dev.polygon_parts):
            coords = np.asarray(ring).tolist()
            coords.append(coords[0])
            features.append({
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [coords]},
                "properties": {
                    "parcel_id": parcel_id,
                    "part": k,
                    "subdivision_id": subdivision_id,
                    "area_m2": dev.area_m2,
                    "limiting_rule": dev.limiting_rule.value,
                },
            })
        if not dev.polygon_parts:
            features.append({
                "type": "Feature",
                "geometry": None,
                "properties": {
                    "parcel_id": parcel_id,
                    "part": None,
                    "subdivision_id": subdivision_id,
                    "area_m2": dev.area_m2,
                    "limiting_rule": dev.limiting_rule.value,
                },
            })
    return {"type": "FeatureCollection", "features": features}


# ---------------------------------------------------------------------------
# CSV inputs


def _read_csv(path: Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"input file not found: {path}")
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


def load_costs(path: Path) -> dict[str, dict[int, CostAssumptions]]:
    """Cost table keyed by technology then period.

    Columns include capex, fixed/variable O&M, fuel, financing, and (for
    solar) interconnection unit costs; storage rows carry
    ``energy_capex_usd_per_kwh``.
    """
    out: dict[str, dict[int, CostAssumptions]] = {}
    energy_capex: dict[int, float] = {}
    for row in _read_csv(path):
        tech = row["technology"].strip()
        period = int(row["period"])
        costs = CostAssumptions(
            capex_usd_per_kw=float(row["capex_usd_per_kw"]),
            fixed_om_usd_per_kw_yr=float(row["fixed_om_usd_per_kw_yr"]),
            variable_om_usd_per_mwh=float(row["variable_om_usd_per_mwh"]),
            discount_rate=float(row["discount_rate"]),
            lifetime_yr=float(row["lifetime_yr"]),
            interconnect_usd_per_mw_km=float(row.get("interconnect_usd_per_mw_km") or 0.0),
            interconnect_fixed_usd_per_mw=float(row.get("interconnect_fixed_usd_per_mw") or 0.0),
            fuel_usd_per_mwh=float(row.get("fuel_usd_per_mwh") or 0.0),
        )
        out.setdefault(tech, {})
        if period in out[tech]:
            raise ValidationError(f"{path}: duplicate costs for {tech!r} period {period}")
        out[tech][period] = costs
        if tech == "storage":
            energy_capex[period] = float(row.get("energy_capex_usd_per_kwh") or 0.0)
    if energy_capex:
        out["_storage_energy_capex"] = {
            p: CostAssumptions(v, 0.0, 0.0, 0.0, 1.0) for p, v in energy_capex.items()
        }
    return out


def storage_energy_capex(costs: dict[str, dict[int, CostAssumptions]]) -> dict[int, float]:
    table = costs.get("_storage_energy_capex", {})
    return {p: c.capex_usd_per_kw for p, c in table.items()}


def load_regions(path: Path) -> list[tuple[str, float, float]]:
    rows = _read_csv(path)
    out = [
        (row["region_id"].strip(), float(row["centroid_x_m"]), float(row["centroid_y_m"]))
        for row in rows
    ]
    ids = [r[0] for r in out]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{path}: duplicate region ids")
    return sorted(out)


def load_demand(
    demand_path: Path,
    growth_path: Path,
    region_ids: Sequence[str],
    periods: Sequence[int],
) -> dict[str, dict[int, np.ndarray]]:
    """Base-year hourly demand per region, scaled by per-period multipliers."""
    rows = _read_csv(demand_path)
    if len(rows) != HOURS_PER_YEAR:
        raise ValidationError(
            f"{demand_path}: expected {HOURS_PER_YEAR} hourly rows, got {len(rows)}"
        )
    base: dict[str, np.ndarray] = {}
    for region_id in region_ids:
        if region_id not in rows[0]:
            raise ValidationError(f"{demand_path}: missing column {region_id!r}")
        base[region_id] = np.array([float(r[region_id]) for r in rows])
    growth_rows = _read_csv(growth_path)
    multiplier = {int(r["period"]): float(r["multiplier"]) for r in growth_rows}
    missing = set(periods) - set(multiplier)
    if missing:
        raise ValidationError(f"{growth_path}: missing periods {sorted(missing)}")
    return {
        region_id: {p: base[region_id] * multiplier[p] for p in periods}
        for region_id in region_ids
    }


def load_fleet(
    path: Path,
) -> tuple[dict[tuple[str, str], float], dict[tuple[str, str], tuple[float, float]]]:
    """Existing capacity per (region, technology), plus optional variable-cost
    overrides for fleet technologies that have no entry in the cost table."""
    capacity: dict[tuple[str, str], float] = {}
    overrides: dict[tuple[str, str], tuple[float, float]] = {}
    for row in _read_csv(path):
        key = (row["region_id"].strip(), row["technology"].strip())
        if key in capacity:
            raise ValidationError(f"{path}: duplicate fleet entry {key}")
        capacity[key] = float(row["capacity_mw"])
        vom = row.get("vom_usd_per_mwh")
        fuel = row.get("fuel_usd_per_mwh")
        if vom not in (None, "") or fuel not in (None, ""):
            overrides[key] = (float(vom or 0.0), float(fuel or 0.0))
    return capacity, overrides


def load_corridors(path: Path) -> list[TransmissionCorridor]:
    out = []
    for row in _read_csv(path):
        expandable_text = (row.get("expandable") or "true").strip().lower()
        out.append(TransmissionCorridor(
            region_a=row["region_a"].strip(),
            region_b=row["region_b"].strip(),
            existing_capacity_mw=float(row["existing_capacity_mw"]),
            cost_usd_per_mw=float(row["cost_usd_per_mw"]),
            expandable=expandable_text == "true",
        ))
    return out


def load_parcel_sizes(path: Path) -> list[float]:
    sizes = [float(row["area_m2"]) for row in _read_csv(path)]
    if not sizes:
        raise ValidationError(f"{path}: parcel size distribution is empty")
    return sizes


def load_cf_override(path: Path) -> dict[str, np.ndarray]:
    rows = _read_csv(path)
    if len(rows) != HOURS_PER_YEAR:
        raise ValidationError(
            f"{path}: expected {HOURS_PER_YEAR} hourly rows, got {len(rows)}"
        )
    columns = [name for name in rows[0] if name != "hour"]
    return {
        name: np.array([float(r[name]) for r in rows]) for name in columns
    }
