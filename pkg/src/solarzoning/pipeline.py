"""End-to-end scenario runs: inputs -> parcels -> supply -> expansion -> files.

A run is a pure function of its configuration: every random draw is seeded
from the config, iteration orders are sorted, and artifact writers format
floats with ``repr``, so rerunning a config produces byte-identical output.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import IMPLEMENTATION
from .config import ScenarioConfig
from .errors import DimensionMismatchError, ValidationError
from .expansion.model import (
    PlanningProblem,
    PlanResult,
    Region,
    StorageParams,
    TransmissionCorridor,
    run_plan,
    select_rep_days,
)
from .io import (
    Subdivision,
    load_cf_override,
    load_corridors,
    load_costs,
    load_demand,
    load_exclusions,
    load_fleet,
    load_parcel_sizes,
    load_polylines,
    load_regions,
    load_subdivisions,
    load_transmission,
    parcels_to_geojson,
    storage_energy_capex,
    write_csv,
    write_json,
)
from .parcels import (
    ExclusionMask,
    Parcel,
    ParcelIndex,
    apply_exclusions,
    classify_edges,
    generate_parcels,
)
from .resource import (
    HOURS_PER_YEAR,
    CapacityFactorSeries,
    CostAssumptions,
    interconnection_cost,
    lcoe,
    levelized_transmission_cost,
    synthetic_cf,
    synthetic_wind_cf,
)
from .supply import (
    SupplyCurve,
    SupplySite,
    WaterfallResult,
    build_supply_curve,
    scenario_capacity_by_subdivision,
    top_fraction,
    waterfall,
)
from .svgplot import grouped_bar_chart, step_chart
from .zoning import (
    DEFAULT_UNZONED_RULE,
    OrdinanceRecord,
    ScenarioKind,
    parse_ordinance_db,
    scenario_rules,
)


@dataclass
class RunInputs:
    """Everything read from disk for one run."""

    subdivisions: list[Subdivision]
    roads: list[np.ndarray]
    transmission: list
    exclusions: ExclusionMask | None
    records: list[OrdinanceRecord]
    costs: dict[str, dict[int, CostAssumptions]]
    regions: list[tuple[str, float, float]]
    demand: dict[str, dict[int, np.ndarray]]
    fleet: dict[tuple[str, str], float]
    fleet_vom_fuel: dict[tuple[str, str], tuple[float, float]]
    corridors: list[TransmissionCorridor]
    parcel_sizes: list[float]
    cf_override: dict[str, np.ndarray]


@dataclass(frozen=True)
class SiteCharacter:
    """Scenario-independent per-subdivision solar characterization."""

    subdivision_id: str
    region_id: str
    centroid: tuple[float, float]
    cf: CapacityFactorSeries
    wind_cf: CapacityFactorSeries
    interconnect_usd_per_mw: float
    lcoe_usd_per_mwh: float
    lcot_usd_per_mwh: float


@dataclass
class RunArtifacts:
    """In-memory results of a run, mirrored to the output directory."""

    config: ScenarioConfig
    parcels_by_subdivision: dict[str, list[Parcel]]
    characters: dict[str, SiteCharacter]
    eligible: list[str]
    waterfall: WaterfallResult
    curves: dict[str, SupplyCurve]
    capacities: dict[str, dict[str, float]]
    problem: PlanningProblem
    result: PlanResult | None


def load_inputs(cfg: ScenarioConfig) -> RunInputs:
    records = parse_ordinance_db(cfg.paths["ordinances"].open())
    roads = [line for _, line in load_polylines(cfg.paths["roads"])]
    exclusions = None
    if "exclusions" in cfg.paths:
        exclusions = load_exclusions(cfg.paths["exclusions"])
    costs = load_costs(cfg.paths["costs"])
    regions = load_regions(cfg.paths["regions"])
    region_ids = [r[0] for r in regions]
    demand = load_demand(
        cfg.paths["demand"], cfg.paths["demand_growth"], region_ids, cfg.periods
    )
    fleet, fleet_vom_fuel = load_fleet(cfg.paths["existing_fleet"])
    cf_override = {}
    if "cf_override" in cfg.paths:
        cf_override = load_cf_override(cfg.paths["cf_override"])
    return RunInputs(
        subdivisions=load_subdivisions(cfg.paths["subdivisions"]),
        roads=roads,
        transmission=load_transmission(cfg.paths["transmission"]),
        exclusions=exclusions,
        records=records,
        costs=costs,
        regions=regions,
        demand=demand,
        fleet=fleet,
        fleet_vom_fuel=fleet_vom_fuel,
        corridors=load_corridors(cfg.paths["corridors"]),
        parcel_sizes=load_parcel_sizes(cfg.paths["parcel_sizes"]),
        cf_override=cf_override,
    )


def _subdivision_seed(seed: int, subdivision_id: str) -> int:
    return zlib.crc32(f"parcels:{seed}:{subdivision_id}".encode())


def _near(roads: list[np.ndarray], sub: Subdivision, pad: float = 50.0) -> list[np.ndarray]:
    lo = sub.ring.min(axis=0) - pad
    hi = sub.ring.max(axis=0) + pad
    kept = []
    for line in roads:
        if (line[:, 0].max() >= lo[0] and line[:, 0].min() <= hi[0]
                and line[:, 1].max() >= lo[1] and line[:, 1].min() <= hi[1]):
            kept.append(line)
    return kept


def build_parcels(
    inputs: RunInputs,
    cfg: ScenarioConfig,
    only: set[str] | None = None,
) -> dict[str, list[Parcel]]:
    """Generate, classify, and exclusion-trim parcels per subdivision.

    ``only`` restricts generation to the named subdivisions; per-subdivision
    seeding keeps each subdivision's parcels identical either way.
    """
    out: dict[str, list[Parcel]] = {}
    for sub in inputs.subdivisions:
        if only is not None and sub.subdivision_id not in only:
            continue
        roads = _near(inputs.roads, sub)
        raw = generate_parcels(
            sub.ring,
            inputs.parcel_sizes,
            roads,
            _subdivision_seed(cfg.seed, sub.subdivision_id),
            subdivision_id=sub.subdivision_id,
        )
        index = ParcelIndex(raw)
        classified = [
            classify_edges(p, roads, index, cfg.participation_rate, cfg.seed)
            for p in raw
        ]
        if inputs.exclusions is not None:
            classified = apply_exclusions(classified, inputs.exclusions)
        out[sub.subdivision_id] = classified
    return out


def site_characters(inputs: RunInputs, cfg: ScenarioConfig) -> dict[str, SiteCharacter]:
    """Capacity factors, interconnection, and cost ranks per subdivision."""
    first_period = cfg.periods[0]
    solar_costs = inputs.costs["solar"][first_period]
    out: dict[str, SiteCharacter] = {}
    for sub in inputs.subdivisions:
        centroid = sub.centroid
        if sub.subdivision_id in inputs.cf_override:
            cf = CapacityFactorSeries.from_values(
                sub.subdivision_id, inputs.cf_override[sub.subdivision_id]
            )
        else:
            cf = synthetic_cf(centroid, cfg.seed, sub.subdivision_id)
        wind_cf = synthetic_wind_cf(centroid, cfg.seed, sub.subdivision_id)
        icx = interconnection_cost(centroid, inputs.transmission, solar_costs)
        out[sub.subdivision_id] = SiteCharacter(
            subdivision_id=sub.subdivision_id,
            region_id=sub.region_id,
            centroid=centroid,
            cf=cf,
            wind_cf=wind_cf,
            interconnect_usd_per_mw=icx,
            lcoe_usd_per_mwh=lcoe(cf.mean_cf, solar_costs, icx),
            lcot_usd_per_mwh=levelized_transmission_cost(cf.mean_cf, solar_costs, icx),
        )
    return out


def _site(character: SiteCharacter, capacity_mw: float, wind: bool = False) -> SupplySite:
    return SupplySite(
        subdivision_id=character.subdivision_id,
        region_id=character.region_id,
        capacity_mw=capacity_mw,
        lcoe_usd_per_mwh=character.lcoe_usd_per_mwh,
        cf=character.wind_cf if wind else character.cf,
        interconnect_usd_per_mw=0.0 if wind else character.interconnect_usd_per_mw,
        lcot_usd_per_mwh=character.lcot_usd_per_mwh,
    )


def eligible_subdivisions(
    characters: dict[str, SiteCharacter], fraction: float
) -> list[str]:
    """The cheapest-to-connect fraction of subdivisions.

    Ranking uses only interconnection cost per MWh, which does not depend on
    the zoning scenario, so every scenario screens the same candidate set.
    """
    placeholder = [_site(c, 0.0) for c in characters.values()]
    kept = top_fraction(placeholder, fraction)
    return sorted(s.subdivision_id for s in kept)


def scenario_sites(
    parcels_by_subdivision: dict[str, list[Parcel]],
    records: list[OrdinanceRecord],
    characters: dict[str, SiteCharacter],
    eligible: list[str],
    scenario: ScenarioKind,
    cfg: ScenarioConfig,
    capacities: dict[str, float] | None = None,
) -> list[SupplySite]:
    """Solar supply sites for one scenario, restricted to eligible land."""
    if capacities is None:
        rules = scenario_rules(records, scenario, cfg.seed, DEFAULT_UNZONED_RULE)
        flat = [p for sid in eligible for p in parcels_by_subdivision.get(sid, [])]
        capacities = scenario_capacity_by_subdivision(
            flat, rules, cfg.power_density_w_per_m2
        )
    eligible_set = set(eligible)
    return [
        _site(characters[sid], capacities[sid])
        for sid in sorted(capacities)
        if sid in eligible_set and capacities[sid] > 0
    ]


def _assemble_problem(
    inputs: RunInputs,
    cfg: ScenarioConfig,
    solar_sites: list[SupplySite],
    wind_sites: list[SupplySite],
    rep_days=None,
) -> PlanningProblem:
    regions = [
        Region(region_id, (x, y), dict(inputs.demand[region_id]))
        for region_id, x, y in inputs.regions
    ]
    thermal_costs = {
        tech: table
        for tech, table in inputs.costs.items()
        if tech not in ("solar", "wind", "storage", "_storage_energy_capex")
    }
    storage = None
    if "storage" in inputs.costs:
        storage = StorageParams(
            power_costs=inputs.costs["storage"],
            energy_capex_usd_per_kwh=storage_energy_capex(inputs.costs),
        )
    return PlanningProblem(
        periods=list(cfg.periods),
        regions=regions,
        corridors=inputs.corridors,
        solar_sites=solar_sites,
        wind_sites=wind_sites,
        solar_costs=inputs.costs["solar"],
        wind_costs=inputs.costs["wind"],
        thermal_costs=thermal_costs,
        storage=storage,
        existing_mw=dict(inputs.fleet),
        existing_vom_fuel=dict(inputs.fleet_vom_fuel),
        reserve_margin=cfg.reserve_margin,
        solar_share_target=cfg.solar_share_target,
        days_per_season=cfg.days_per_season,
        tx_discount_rate=cfg.tx_discount_rate,
        tx_lifetime_yr=cfg.tx_lifetime_yr,
        myopic=cfg.myopic,
        rep_days=rep_days,
    )


def prepare(cfg: ScenarioConfig) -> RunArtifacts:
    """Build everything up to (but not including) the plan solve.

    Returns artifacts with ``result=None``; ``run`` solves the assembled
    problem and fills it in.  Exporting the model without solving goes
    through here so the written file is exactly the problem a run solves.
    """
    inputs = load_inputs(cfg)
    characters = site_characters(inputs, cfg)
    eligible = eligible_subdivisions(characters, cfg.top_site_fraction)
    parcels_by_subdivision = build_parcels(inputs, cfg, only=set(eligible))

    eligible_parcels = [
        p for sid in eligible for p in parcels_by_subdivision.get(sid, [])
    ]

    def site_factory(subdivision_id: str, capacity_mw: float) -> SupplySite:
        return _site(characters[subdivision_id], capacity_mw)

    fall = waterfall(
        eligible_parcels,
        inputs.records,
        power_density_w_per_m2=cfg.power_density_w_per_m2,
        unzoned_defaults=DEFAULT_UNZONED_RULE,
        site_factory=site_factory,
    )

    capacities: dict[str, dict[str, float]] = {
        ScenarioKind.UNREGULATED.value: {
            s.subdivision_id: s.capacity_mw for s in fall.curves["unregulated"].sites
        },
        ScenarioKind.BASELINE.value: {
            s.subdivision_id: s.capacity_mw for s in fall.curves["baseline"].sites
        },
    }
    curves: dict[str, SupplyCurve] = {
        ScenarioKind.UNREGULATED.value: fall.curves["unregulated"],
        ScenarioKind.BASELINE.value: fall.curves["baseline"],
    }
    if cfg.scenario is ScenarioKind.PROGRESSIVE:
        prog_sites = scenario_sites(
            parcels_by_subdivision, inputs.records, characters, eligible,
            ScenarioKind.PROGRESSIVE, cfg,
        )
        capacities[ScenarioKind.PROGRESSIVE.value] = {
            s.subdivision_id: s.capacity_mw for s in prog_sites
        }
        curves[ScenarioKind.PROGRESSIVE.value] = build_supply_curve(
            prog_sites, ScenarioKind.PROGRESSIVE.value
        )

    active_caps = capacities[cfg.scenario.value]
    solar_sites = scenario_sites(
        parcels_by_subdivision, inputs.records, characters, eligible,
        cfg.scenario, cfg, capacities=active_caps,
    )

    unregulated_caps = capacities[ScenarioKind.UNREGULATED.value]
    wind_scale = cfg.wind_power_density_w_per_m2 / cfg.power_density_w_per_m2
    wind_sites = [
        _site(characters[sid], cap * wind_scale, wind=True)
        for sid, cap in sorted(unregulated_caps.items())
        if cap * wind_scale > 0
    ]

    # Representative days are picked from scenario-independent inputs
    # (final-period demand plus every candidate site's resource profile),
    # so plans under different ordinance scenarios dispatch over the same
    # sampled days and their objectives stay directly comparable.
    final = cfg.periods[-1]
    demand_final = np.zeros(HOURS_PER_YEAR)
    for region_id in sorted(inputs.demand):
        demand_final += inputs.demand[region_id][final]
    profile_series = [characters[sid].cf for sid in eligible] + [
        characters[sid].wind_cf for sid in eligible
    ]
    rep_days = select_rep_days(demand_final, profile_series, cfg.days_per_season)

    problem = _assemble_problem(
        inputs, cfg, solar_sites, wind_sites, rep_days=rep_days
    )

    return RunArtifacts(
        config=cfg,
        parcels_by_subdivision=parcels_by_subdivision,
        characters=characters,
        eligible=eligible,
        waterfall=fall,
        curves=curves,
        capacities=capacities,
        problem=problem,
        result=None,
    )


def run(cfg: ScenarioConfig, out_dir: Path | str | None = None) -> RunArtifacts:
    """Execute one scenario end to end; write artifacts when out_dir given."""
    artifacts = prepare(cfg)
    artifacts.result = run_plan(artifacts.problem)
    if out_dir is not None:
        write_artifacts(artifacts, Path(out_dir))
    return artifacts


# ---------------------------------------------------------------------------
# artifact writing


def _build_rows(problem: PlanningProblem, result: PlanResult) -> list[tuple]:
    from .resource import crf

    solar_by_sub = {s.subdivision_id: s for s in problem.solar_sites}
    wind_by_sub = {s.subdivision_id: s for s in problem.wind_sites}
    rows: list[tuple] = []
    for period in result.periods:
        for key, mw in sorted(result.builds_mw.get(period, {}).items()):
            if mw <= 0:
                continue
            kind, _, tail = key.partition(":")
            if kind == "solar":
                site = solar_by_sub[tail]
                costs = problem.solar_costs[period]
                annual = crf(costs.discount_rate, costs.lifetime_yr) * (
                    costs.capex_usd_per_kw * 1000.0 + site.interconnect_usd_per_mw
                ) * mw
                region = site.region_id
                tech = f"solar:{tail}"
            elif kind == "wind":
                site = wind_by_sub[tail]
                costs = problem.wind_costs[period]
                annual = crf(costs.discount_rate, costs.lifetime_yr) * (
                    costs.capex_usd_per_kw * 1000.0
                ) * mw
                region = site.region_id
                tech = f"wind:{tail}"
            elif kind == "storage_power":
                costs = problem.storage.power_costs[period]
                annual = crf(costs.discount_rate, costs.lifetime_yr) * (
                    costs.capex_usd_per_kw * 1000.0
                ) * mw
                region = tail
                tech = "storage_power"
            elif kind == "storage_energy":
                capex = problem.storage.energy_capex_usd_per_kwh[period]
                power_costs = problem.storage.power_costs[period]
                annual = crf(
                    power_costs.discount_rate, power_costs.lifetime_yr
                ) * capex * 1000.0 * mw
                region = tail
                tech = "storage_energy"
            else:
                costs = problem.thermal_costs[kind][period]
                annual = crf(costs.discount_rate, costs.lifetime_yr) * (
                    costs.capex_usd_per_kw * 1000.0
                ) * mw
                region = tail
                tech = kind
            rows.append((period, region, tech, mw, annual))
        for corridor_key, mw in sorted(result.tx_builds_mw.get(period, {}).items()):
            if mw <= 0:
                continue
            corridor = next(c for c in problem.corridors if c.key == corridor_key)
            annual = crf(
                problem.tx_discount_rate, problem.tx_lifetime_yr
            ) * corridor.cost_usd_per_mw * mw
            rows.append((period, corridor_key, "transmission", mw, annual))
    return rows


def _tech_family(key: str) -> str:
    kind, _, _ = key.partition(":")
    return kind


def write_artifacts(artifacts: RunArtifacts, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = artifacts.config
    result = artifacts.result
    fall = artifacts.waterfall

    # supply_curve.csv: one block per scenario curve
    curve_rows = []
    for label in sorted(artifacts.curves):
        curve = artifacts.curves[label]
        cumulative = 0.0
        for site in curve.sites:
            cumulative += site.capacity_mw
            curve_rows.append((
                label, site.subdivision_id, site.region_id, site.capacity_mw,
                site.lcoe_usd_per_mwh, site.lcot_usd_per_mwh, cumulative,
            ))
    write_csv(
        out_dir / "supply_curve.csv",
        ("scenario", "subdivision_id", "region_id", "capacity_mw",
         "lcoe_usd_per_mwh", "lcot_usd_per_mwh", "cumulative_mw"),
        curve_rows,
    )

    # waterfall.csv: stage totals and per-layer reductions
    stage_rows = [(0, "unregulated", "", fall.totals_mw["unregulated"], 0.0)]
    for k, layer in enumerate(fall.layer_order):
        label = "baseline" if k == len(fall.layer_order) - 1 else layer.value
        stage_rows.append((
            k + 1, label, layer.value, fall.totals_mw[label], fall.reductions_mw[layer],
        ))
    write_csv(
        out_dir / "waterfall.csv",
        ("stage", "label", "layer", "capacity_mw", "reduction_mw"),
        stage_rows,
    )

    # investments.csv
    write_csv(
        out_dir / "investments.csv",
        ("period", "region", "technology", "built_mw", "annualized_cost_usd"),
        _build_rows(artifacts.problem, result),
    )

    # plan.json
    payload = result.to_json_dict()
    payload["scenario"] = cfg.scenario.value
    payload["seed"] = cfg.seed
    payload["solar_share_target"] = cfg.solar_share_target
    write_json(out_dir / "plan.json", payload)

    # run_metadata.json
    n_parcels = sum(len(v) for v in artifacts.parcels_by_subdivision.values())
    write_json(out_dir / "run_metadata.json", {
        "config_name": cfg.name,
        "scenario": cfg.scenario.value,
        "seed": cfg.seed,
        "solar_share_target": cfg.solar_share_target,
        "periods": list(cfg.periods),
        "n_subdivisions": len(artifacts.parcels_by_subdivision),
        "n_parcels": n_parcels,
        "n_eligible_subdivisions": len(artifacts.eligible),
        "n_solar_sites": len(artifacts.problem.solar_sites),
        "unregulated_mw": fall.unregulated_mw,
        "baseline_mw": fall.baseline_mw,
        "scenario_supply_mw": sum(
            artifacts.capacities[cfg.scenario.value].values()
        ),
        "objective_usd": result.objective_usd,
        "solar_built_mw": result.solar_built_mw,
        "kernel_implementation": IMPLEMENTATION,
        "version": __version__,
    })

    # charts
    series = []
    for label in sorted(artifacts.curves):
        curve = artifacts.curves[label]
        xs = [x for x, _ in curve.points]
        ys = [y for _, y in curve.points]
        series.append((label, xs, ys))
    (out_dir / "supply_curves.svg").write_text(
        step_chart("Supply curves by scenario", "Cumulative capacity (MW)",
                   "LCOE (USD/MWh)", series)
    )

    groups = [str(p) for p in result.periods]
    families = sorted({
        _tech_family(key)
        for builds in result.builds_mw.values()
        for key in builds
    })
    bar_series = []
    for family in families:
        values = [
            sum(mw for key, mw in result.builds_mw.get(p, {}).items()
                if _tech_family(key) == family)
            for p in result.periods
        ]
        bar_series.append((family, values))
    (out_dir / "capacity_bars.svg").write_text(
        grouped_bar_chart("Capacity additions by period", "Period",
                          "Built capacity (MW)", groups, bar_series)
    )

    # geometry artifacts for inspection
    all_parcels = [
        p for sid in sorted(artifacts.parcels_by_subdivision)
        for p in artifacts.parcels_by_subdivision[sid]
    ]
    write_json(out_dir / "parcels.geojson", parcels_to_geojson(all_parcels))


# ---------------------------------------------------------------------------
# run comparison

COMPARE_METRICS = (
    "objective_usd",
    "solar_built_mw",
    "solar_annualized_fixed_cost_usd",
    "solar_capacity_weighted_mean_cf",
    "unregulated_mw",
    "baseline_mw",
    "scenario_supply_mw",
)


def delta_percent(value_a: float, value_b: float) -> float:
    if value_a == 0.0:
        return 0.0 if value_b == 0.0 else float("inf")
    return 100.0 * (value_b - value_a) / abs(value_a)


def compare_runs(dir_a: Path | str, dir_b: Path | str,
                 out_path: Path | str | None = None) -> list[tuple[str, float, float, float]]:
    """Tabulate headline metric changes between two completed runs."""
    import json as _json

    def load(run_dir: Path) -> tuple[dict, dict]:
        run_dir = Path(run_dir)
        plan_path = run_dir / "plan.json"
        meta_path = run_dir / "run_metadata.json"
        for path in (plan_path, meta_path):
            if not path.exists():
                raise ValidationError(f"not a completed run directory: missing {path}")
        return _json.loads(plan_path.read_text()), _json.loads(meta_path.read_text())

    plan_a, meta_a = load(Path(dir_a))
    plan_b, meta_b = load(Path(dir_b))
    if plan_a["periods"] != plan_b["periods"]:
        raise DimensionMismatchError(
            f"runs cover different periods: {plan_a['periods']} vs {plan_b['periods']}"
        )
    if sorted(plan_a["region_ids"]) != sorted(plan_b["region_ids"]):
        raise DimensionMismatchError(
            f"runs cover different regions: {plan_a['region_ids']} vs "
            f"{plan_b['region_ids']}"
        )

    def metric(plan: dict, meta: dict, name: str) -> float:
        if name in plan:
            return float(plan[name])
        return float(meta[name])

    rows = []
    for name in COMPARE_METRICS:
        value_a = metric(plan_a, meta_a, name)
        value_b = metric(plan_b, meta_b, name)
        rows.append((name, value_a, value_b, delta_percent(value_a, value_b)))
    if out_path is not None:
        write_csv(
            Path(out_path),
            ("metric", "value_a", "value_b", "delta_pct"),
            rows,
        )
    return rows
