"""Multi-period capacity-expansion planning on representative days.

The planner co-optimizes generation, storage, and inter-region transmission
builds over 5-year periods, dispatching each period over a small set of
weighted representative days (a fixed number per meteorological season plus
the annual peak-demand day at weight one).  Electricity moves between
regions as a lossless transport flow bounded by corridor capacity.  The
objective sums annualized system cost over all modeled periods: every
vintage pays its capital annuity (solar capital includes site
interconnection) in its build period and in each later period it serves,
fixed O&M falls on all installed capacity, and dispatch adds weighted
variable costs.  All periods are solved in one LP by default; a myopic
per-period mode is available as a flag.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InfeasiblePlanError, ValidationError
from ..resource import HOURS_PER_YEAR, CapacityFactorSeries, CostAssumptions, crf
from ..supply import SupplySite
from .lp import INF, LinearProgram, Solution

MONTH_LENGTHS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)
SEASONS = ("DJF", "MAM", "JJA", "SON")
_SEASON_OF_MONTH = {
    12: 0, 1: 0, 2: 0,
    3: 1, 4: 1, 5: 1,
    6: 2, 7: 2, 8: 2,
    9: 3, 10: 3, 11: 3,
}
_BALANCE_RTOL = 1e-6


def _month_of_day() -> np.ndarray:
    return np.repeat(np.arange(1, 13), MONTH_LENGTHS)


SEASON_OF_DAY = np.array([_SEASON_OF_MONTH[m] for m in _month_of_day()])


@dataclass
class Region:
    """A demand region with one hourly load profile per period."""

    region_id: str
    centroid: tuple[float, float]
    demand_by_period: dict[int, np.ndarray]

    def __post_init__(self):
        for period, demand in self.demand_by_period.items():
            demand = np.asarray(demand, dtype=np.float64)
            if demand.shape != (HOURS_PER_YEAR,):
                raise ValidationError(
                    f"region {self.region_id!r}, period {period}: demand must "
                    f"have {HOURS_PER_YEAR} hours"
                )
            if np.any(demand < 0):
                raise ValidationError(
                    f"region {self.region_id!r}, period {period}: negative demand"
                )
            self.demand_by_period[period] = demand


@dataclass(frozen=True)
class TransmissionCorridor:
    """Transfer capability between two regions (lossless transport)."""

    region_a: str
    region_b: str
    existing_capacity_mw: float
    cost_usd_per_mw: float
    expandable: bool = True

    def __post_init__(self):
        if self.region_a == self.region_b:
            raise ValidationError("corridor endpoints must differ")
        if self.existing_capacity_mw < 0 or self.cost_usd_per_mw < 0:
            raise ValidationError("corridor capacity and cost must be non-negative")

    @property
    def key(self) -> str:
        return f"{self.region_a}|{self.region_b}"


@dataclass(frozen=True)
class RepDay:
    """One representative day: a calendar day index and its annual weight."""

    day_index: int
    weight_days: float
    is_peak: bool = False

    def __post_init__(self):
        if not 0 <= self.day_index < 365:
            raise ValidationError("day_index must be within [0, 365)")
        if self.weight_days <= 0:
            raise ValidationError("weight_days must be positive")

    @property
    def hours(self) -> np.ndarray:
        return np.arange(self.day_index * 24, self.day_index * 24 + 24)


@dataclass
class StorageParams:
    """Region-level storage technology: power and energy built separately."""

    power_costs: dict[int, CostAssumptions]
    energy_capex_usd_per_kwh: dict[int, float]
    eff_charge: float = math.sqrt(0.85)
    eff_discharge: float = math.sqrt(0.85)

    def __post_init__(self):
        if not 0 < self.eff_charge <= 1 or not 0 < self.eff_discharge <= 1:
            raise ValidationError("storage efficiencies must be within (0, 1]")
        for period, capex in self.energy_capex_usd_per_kwh.items():
            if capex < 0:
                raise ValidationError(f"period {period}: negative energy capex")


@dataclass
class PlanningProblem:
    """Everything the expansion LP needs, validated on construction."""

    periods: list[int]
    regions: list[Region]
    corridors: list[TransmissionCorridor]
    solar_sites: list[SupplySite]
    wind_sites: list[SupplySite]
    solar_costs: dict[int, CostAssumptions]
    wind_costs: dict[int, CostAssumptions]
    thermal_costs: dict[str, dict[int, CostAssumptions]]
    storage: StorageParams | None = None
    existing_mw: dict[tuple[str, str], float] = field(default_factory=dict)
    existing_vom_fuel: dict[tuple[str, str], tuple[float, float]] = field(
        default_factory=dict
    )
    reserve_margin: float = 0.15
    solar_share_target: float = 0.0
    days_per_season: int = 2
    rep_days: list[RepDay] | None = None
    tx_discount_rate: float = 0.05
    tx_lifetime_yr: float = 40.0
    myopic: bool = False
    prebuilt_mw: dict[str, float] = field(default_factory=dict)
    prebuilt_tx_mw: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.periods:
            raise ValidationError("periods must be non-empty")
        if sorted(set(self.periods)) != list(self.periods):
            raise ValidationError("periods must be strictly increasing")
        if not 0.0 <= self.solar_share_target <= 1.0:
            raise ValidationError("solar_share_target must be within [0, 1]")
        if self.reserve_margin < 0:
            raise ValidationError("reserve_margin must be non-negative")
        if self.days_per_season < 1:
            raise ValidationError("days_per_season must be at least 1")
        region_ids = [r.region_id for r in self.regions]
        if len(set(region_ids)) != len(region_ids):
            raise ValidationError("duplicate region ids")
        known = set(region_ids)
        for region in self.regions:
            missing = set(self.periods) - set(region.demand_by_period)
            if missing:
                raise ValidationError(
                    f"region {region.region_id!r}: missing demand for periods "
                    f"{sorted(missing)}"
                )
        seen_pairs = set()
        for corridor in self.corridors:
            for end in (corridor.region_a, corridor.region_b):
                if end not in known:
                    raise ValidationError(f"corridor references unknown region {end!r}")
            pair = frozenset((corridor.region_a, corridor.region_b))
            if pair in seen_pairs:
                raise ValidationError(f"duplicate corridor {corridor.key!r}")
            seen_pairs.add(pair)
        for site in list(self.solar_sites) + list(self.wind_sites):
            if site.region_id not in known:
                raise ValidationError(
                    f"site {site.subdivision_id!r} references unknown region "
                    f"{site.region_id!r}"
                )
        for label, costs in (("solar", self.solar_costs), ("wind", self.wind_costs)):
            missing = set(self.periods) - set(costs)
            if missing:
                raise ValidationError(f"{label} costs missing periods {sorted(missing)}")
        for tech, by_period in self.thermal_costs.items():
            missing = set(self.periods) - set(by_period)
            if missing:
                raise ValidationError(
                    f"technology {tech!r}: costs missing periods {sorted(missing)}"
                )
        if self.storage is not None:
            for name, table in (
                ("power", self.storage.power_costs),
                ("energy", self.storage.energy_capex_usd_per_kwh),
            ):
                missing = set(self.periods) - set(table)
                if missing:
                    raise ValidationError(
                        f"storage {name} costs missing periods {sorted(missing)}"
                    )
        for (region_id, tech), cap in self.existing_mw.items():
            if region_id not in known:
                raise ValidationError(
                    f"existing fleet references unknown region {region_id!r}"
                )
            if cap < 0:
                raise ValidationError("existing capacity must be non-negative")
            if (
                tech not in self.thermal_costs
                and tech not in ("solar", "wind")
                and (region_id, tech) not in self.existing_vom_fuel
            ):
                raise ValidationError(
                    f"existing fleet technology {tech!r} has no cost assumptions "
                    "and no variable-cost override"
                )


def select_rep_days(
    system_demand: np.ndarray,
    cf_series: Sequence[CapacityFactorSeries],
    days_per_season: int = 2,
) -> list[RepDay]:
    """Pick weighted representative days from one year of hourly data.

    For each meteorological season (DJF, MAM, JJA, SON) the
    ``days_per_season`` days closest to the seasonal centroid of a
    48-dimensional daily feature (24 normalized demand hours stacked with 24
    normalized mean-capacity-factor hours) are chosen, ties broken by day
    index.  The annual peak-demand day is excluded from the pools and added
    with weight one; seasonal weights are scaled so all weights sum to 365.
    """
    demand = np.asarray(system_demand, dtype=np.float64)
    if demand.shape != (HOURS_PER_YEAR,):
        raise ValidationError(f"system demand must have {HOURS_PER_YEAR} hours")
    if days_per_season < 1:
        raise ValidationError("days_per_season must be at least 1")
    demand_days = demand.reshape(365, 24)
    peak_day = int(np.argmax(demand_days.max(axis=1)))
    demand_scale = demand.max()
    cf_profile = (
        np.mean([np.asarray(s.values) for s in cf_series], axis=0)
        if cf_series
        else np.zeros(HOURS_PER_YEAR)
    )
    cf_days = cf_profile.reshape(365, 24)
    features = np.hstack([
        demand_days / demand_scale if demand_scale > 0 else demand_days,
        cf_days / max(float(cf_days.max()), 1e-12),
    ])

    chosen: list[RepDay] = []
    for season_idx in range(len(SEASONS)):
        candidates = np.array([
            d for d in range(365)
            if SEASON_OF_DAY[d] == season_idx and d != peak_day
        ])
        season_size = int(np.sum(SEASON_OF_DAY == season_idx))
        centroid = features[candidates].mean(axis=0)
        dist2 = np.sum((features[candidates] - centroid) ** 2, axis=1)
        order = np.lexsort((candidates, dist2))
        take = min(days_per_season, len(candidates))
        weight = (season_size / take) * (364.0 / 365.0)
        for k in order[:take]:
            chosen.append(RepDay(int(candidates[k]), weight))
    chosen.append(RepDay(peak_day, 1.0, is_peak=True))
    return sorted(chosen, key=lambda rd: rd.day_index)


def _token(text: str) -> str:
    return re.sub(r"[^0-9A-Za-z._-]", "_", text)


@dataclass(frozen=True)
class _Unit:
    """One dispatchable unit in the LP (new-build or existing)."""

    key: str                     # report label, e.g. "solar:R1-S03"
    name: str                    # MPS-safe token
    kind: str                    # solar | wind | thermal | existing
    region_id: str
    tech: str
    buildable: bool
    existing_mw: float
    cf: np.ndarray | None        # None means firm (cf = 1)
    build_limit_mw: float        # cap on total builds (inf when unlimited)
    costs: dict[int, CostAssumptions] | None
    interconnect_usd_per_mw: float = 0.0
    mean_cf: float = 0.0

    def cf_at(self, hour: int) -> float:
        return 1.0 if self.cf is None else float(self.cf[hour])

    @property
    def is_solar(self) -> bool:
        return self.tech == "solar"


def _region_mean_cf(sites: Sequence[SupplySite], region_id: str) -> np.ndarray:
    profiles = [
        np.asarray(s.cf.values) for s in sites if s.region_id == region_id
    ]
    return (
        np.mean(profiles, axis=0) if profiles else np.zeros(HOURS_PER_YEAR)
    )


def _build_units(problem: PlanningProblem) -> list[_Unit]:
    units: list[_Unit] = []
    for site in sorted(problem.solar_sites, key=lambda s: s.subdivision_id):
        sid = site.subdivision_id
        prebuilt = problem.prebuilt_mw.get(f"solar:{sid}", 0.0)
        units.append(_Unit(
            key=f"solar:{sid}", name=f"sol_{_token(sid)}", kind="solar",
            region_id=site.region_id, tech="solar", buildable=True,
            existing_mw=prebuilt, cf=np.asarray(site.cf.values),
            build_limit_mw=max(site.capacity_mw - prebuilt, 0.0),
            costs=problem.solar_costs,
            interconnect_usd_per_mw=site.interconnect_usd_per_mw,
            mean_cf=site.cf.mean_cf,
        ))
    for site in sorted(problem.wind_sites, key=lambda s: s.subdivision_id):
        sid = site.subdivision_id
        prebuilt = problem.prebuilt_mw.get(f"wind:{sid}", 0.0)
        units.append(_Unit(
            key=f"wind:{sid}", name=f"wnd_{_token(sid)}", kind="wind",
            region_id=site.region_id, tech="wind", buildable=True,
            existing_mw=prebuilt, cf=np.asarray(site.cf.values),
            build_limit_mw=max(site.capacity_mw - prebuilt, 0.0),
            costs=problem.wind_costs,
            interconnect_usd_per_mw=site.interconnect_usd_per_mw,
            mean_cf=site.cf.mean_cf,
        ))
    region_ids = sorted(r.region_id for r in problem.regions)
    for tech in sorted(problem.thermal_costs):
        for region_id in region_ids:
            prebuilt = problem.prebuilt_mw.get(f"{tech}:{region_id}", 0.0)
            units.append(_Unit(
                key=f"{tech}:{region_id}",
                name=f"thm_{_token(tech)}_{_token(region_id)}",
                kind="thermal", region_id=region_id, tech=tech, buildable=True,
                existing_mw=prebuilt, cf=None, build_limit_mw=INF,
                costs=problem.thermal_costs[tech],
            ))
    for (region_id, tech), cap in sorted(problem.existing_mw.items()):
        if cap <= 0:
            continue
        if tech in ("solar", "wind"):
            sites = problem.solar_sites if tech == "solar" else problem.wind_sites
            cf_profile = _region_mean_cf(sites, region_id)
            units.append(_Unit(
                key=f"existing_{tech}:{region_id}",
                name=f"exr_{_token(tech)}_{_token(region_id)}",
                kind="existing", region_id=region_id, tech=tech,
                buildable=False, existing_mw=cap, cf=cf_profile,
                build_limit_mw=0.0, costs=None,
                mean_cf=float(cf_profile.mean()),
            ))
        else:
            units.append(_Unit(
                key=f"existing_{tech}:{region_id}",
                name=f"exg_{_token(tech)}_{_token(region_id)}",
                kind="existing", region_id=region_id, tech=tech,
                buildable=False, existing_mw=cap, cf=None,
                build_limit_mw=0.0,
                costs=problem.thermal_costs.get(tech),
            ))
    return units


def _unit_vom_fuel(problem: PlanningProblem, unit: _Unit, period: int) -> float:
    override = problem.existing_vom_fuel.get((unit.region_id, unit.tech))
    if unit.kind == "existing" and override is not None:
        return override[0] + override[1]
    if unit.tech in ("solar", "wind"):
        table = problem.solar_costs if unit.tech == "solar" else problem.wind_costs
        costs = table[period]
    else:
        costs = problem.thermal_costs[unit.tech][period]
    return costs.variable_om_usd_per_mwh + costs.fuel_usd_per_mwh


@dataclass
class ExpansionLP:
    """Assembled LP plus the bookkeeping needed to read a solution back."""

    lp: LinearProgram
    problem: PlanningProblem
    rep_days: list[RepDay]
    units: list[_Unit]
    # Fixed O&M on pre-existing capacity: constant w.r.t. the decision
    # variables, so it is kept out of the LP and added back when reporting
    # the objective.  Existing units without a cost table contribute zero.
    objective_constant: float = 0.0

    @staticmethod
    def build_var(unit: _Unit, period: int) -> str:
        return f"b_{unit.name}_{period}"

    @staticmethod
    def gen_var(unit: _Unit, period: int, day_index: int, hour: int) -> str:
        return f"g_{unit.name}_{period}_d{day_index}_h{hour}"

    @staticmethod
    def flow_var(corridor: TransmissionCorridor, period: int, day_index: int,
                 hour: int) -> str:
        return f"f_{_token(corridor.region_a)}_{_token(corridor.region_b)}_{period}_d{day_index}_h{hour}"

    @staticmethod
    def tx_build_var(corridor: TransmissionCorridor, period: int) -> str:
        return f"btx_{_token(corridor.region_a)}_{_token(corridor.region_b)}_{period}"

    @staticmethod
    def storage_var(prefix: str, region_id: str, period: int,
                    day_index: int | None = None, hour: int | None = None) -> str:
        if day_index is None:
            return f"{prefix}_{_token(region_id)}_{period}"
        return f"{prefix}_{_token(region_id)}_{period}_d{day_index}_h{hour}"


def system_demand(problem: PlanningProblem, period: int) -> np.ndarray:
    total = np.zeros(HOURS_PER_YEAR)
    for region in problem.regions:
        total += region.demand_by_period[period]
    return total


def _resolve_rep_days(problem: PlanningProblem) -> list[RepDay]:
    if problem.rep_days is not None:
        if not problem.rep_days:
            raise ValidationError("rep_days must be non-empty when supplied")
        return list(problem.rep_days)
    # Selection uses the final period: that is where the share target binds
    # and (with shape-preserving demand growth) the peak day is shared.
    final = problem.periods[-1]
    cf_series = [s.cf for s in problem.solar_sites] + [
        s.cf for s in problem.wind_sites
    ]
    return select_rep_days(
        system_demand(problem, final), cf_series, problem.days_per_season
    )


def assemble_lp(
    problem: PlanningProblem, rep_days: list[RepDay] | None = None
) -> ExpansionLP:
    """Assemble the full multi-period LP (all periods jointly)."""
    rep_days = list(rep_days) if rep_days is not None else _resolve_rep_days(problem)
    units = _build_units(problem)
    lp = LinearProgram("expansion")
    periods = problem.periods
    final_period = periods[-1]
    region_ids = [r.region_id for r in problem.regions]
    demand = {
        (r.region_id, p): r.demand_by_period[p]
        for r in problem.regions for p in periods
    }

    # --- build variables -------------------------------------------------
    build_idx: dict[tuple[str, int], int] = {}
    for unit in units:
        if not unit.buildable:
            continue
        for p_i, period in enumerate(periods):
            capex_costs = unit.costs[period]
            # A build commissioned in period p pays its vintage capital
            # annuity, plus that vintage's fixed O&M, in p and every later
            # modeled period (the asset keeps serving the system).
            remaining = len(periods) - p_i
            annual_capital = crf(
                capex_costs.discount_rate, capex_costs.lifetime_yr
            ) * (capex_costs.capex_usd_per_kw * 1000.0 + unit.interconnect_usd_per_mw)
            fom_tail = sum(
                unit.costs[later].fixed_om_usd_per_kw_yr * 1000.0
                for later in periods[p_i:]
            )
            idx = lp.add_var(
                ExpansionLP.build_var(unit, period),
                obj=remaining * annual_capital + fom_tail,
            )
            build_idx[(unit.name, period)] = idx
        if unit.build_limit_mw < INF:
            lp.add_row(
                f"lim_{unit.name}", "L", unit.build_limit_mw,
                [(build_idx[(unit.name, p)], 1.0) for p in periods],
            )

    tx_idx: dict[tuple[str, int], int] = {}
    tx_crf = crf(problem.tx_discount_rate, problem.tx_lifetime_yr)
    for corridor in problem.corridors:
        if not corridor.expandable:
            continue
        for p_i, period in enumerate(periods):
            tx_idx[(corridor.key, period)] = lp.add_var(
                ExpansionLP.tx_build_var(corridor, period),
                obj=(len(periods) - p_i) * tx_crf * corridor.cost_usd_per_mw,
            )

    storage = problem.storage
    stp_idx: dict[tuple[str, int], int] = {}
    ste_idx: dict[tuple[str, int], int] = {}
    if storage is not None:
        for region_id in region_ids:
            for p_i, period in enumerate(periods):
                remaining = len(periods) - p_i
                costs = storage.power_costs[period]
                annual_power = crf(costs.discount_rate, costs.lifetime_yr) * (
                    costs.capex_usd_per_kw * 1000.0
                )
                fom_tail = sum(
                    storage.power_costs[later].fixed_om_usd_per_kw_yr * 1000.0
                    for later in periods[p_i:]
                )
                stp_idx[(region_id, period)] = lp.add_var(
                    ExpansionLP.storage_var("bsp", region_id, period),
                    obj=remaining * annual_power + fom_tail,
                )
                energy_costs = storage.power_costs[period]
                annual_energy = crf(
                    energy_costs.discount_rate, energy_costs.lifetime_yr
                ) * storage.energy_capex_usd_per_kwh[period] * 1000.0
                ste_idx[(region_id, period)] = lp.add_var(
                    ExpansionLP.storage_var("bse", region_id, period),
                    obj=remaining * annual_energy,
                )

    # --- dispatch variables ----------------------------------------------
    gen_idx: dict[tuple[str, int, int, int], int] = {}
    for unit in units:
        for period in periods:
            vom_fuel = _unit_vom_fuel(problem, unit, period)
            for rd in rep_days:
                base_hour = rd.day_index * 24
                for hour in range(24):
                    cf_h = unit.cf_at(base_hour + hour)
                    if cf_h <= 0.0:
                        continue
                    ub = INF
                    if not unit.buildable:
                        ub = unit.existing_mw * cf_h
                    gen_idx[(unit.name, period, rd.day_index, hour)] = lp.add_var(
                        ExpansionLP.gen_var(unit, period, rd.day_index, hour),
                        ub=ub,
                        obj=rd.weight_days * vom_fuel,
                    )

    flow_idx: dict[tuple[str, int, int, int], int] = {}
    for corridor in problem.corridors:
        prebuilt = problem.prebuilt_tx_mw.get(corridor.key, 0.0)
        base_cap = corridor.existing_capacity_mw + prebuilt
        for period in periods:
            for rd in rep_days:
                for hour in range(24):
                    if corridor.expandable:
                        lb, ub = -INF, INF
                    else:
                        lb, ub = -base_cap, base_cap
                    flow_idx[(corridor.key, period, rd.day_index, hour)] = lp.add_var(
                        ExpansionLP.flow_var(corridor, period, rd.day_index, hour),
                        lb=lb, ub=ub,
                    )

    ch_idx: dict[tuple[str, int, int, int], int] = {}
    dis_idx: dict[tuple[str, int, int, int], int] = {}
    soc_idx: dict[tuple[str, int, int, int], int] = {}
    if storage is not None:
        for region_id in region_ids:
            for period in periods:
                for rd in rep_days:
                    for hour in range(24):
                        args = (region_id, period, rd.day_index, hour)
                        ch_idx[args] = lp.add_var(
                            ExpansionLP.storage_var("ch", region_id, period,
                                                    rd.day_index, hour)
                        )
                        dis_idx[args] = lp.add_var(
                            ExpansionLP.storage_var("dis", region_id, period,
                                                    rd.day_index, hour)
                        )
                        soc_idx[args] = lp.add_var(
                            ExpansionLP.storage_var("soc", region_id, period,
                                                    rd.day_index, hour)
                        )

    # --- capacity rows -----------------------------------------------------
    for unit in units:
        if not unit.buildable:
            continue  # existing units are bounded directly on the gen var
        for p_i, period in enumerate(periods):
            cum_builds = [
                (build_idx[(unit.name, earlier)], 1.0)
                for earlier in periods[: p_i + 1]
            ]
            for rd in rep_days:
                base_hour = rd.day_index * 24
                for hour in range(24):
                    key = (unit.name, period, rd.day_index, hour)
                    if key not in gen_idx:
                        continue
                    cf_h = unit.cf_at(base_hour + hour)
                    terms = [(gen_idx[key], 1.0)]
                    terms.extend((idx, -cf_h) for idx, _ in cum_builds)
                    lp.add_row(
                        f"cap_{unit.name}_{period}_d{rd.day_index}_h{hour}",
                        "L", unit.existing_mw * cf_h, terms,
                    )

    # --- corridor flow limits ----------------------------------------------
    for corridor in problem.corridors:
        if not corridor.expandable:
            continue
        prebuilt = problem.prebuilt_tx_mw.get(corridor.key, 0.0)
        base_cap = corridor.existing_capacity_mw + prebuilt
        for p_i, period in enumerate(periods):
            cum_tx = [
                (tx_idx[(corridor.key, earlier)], 1.0)
                for earlier in periods[: p_i + 1]
            ]
            for rd in rep_days:
                for hour in range(24):
                    f_idx = flow_idx[(corridor.key, period, rd.day_index, hour)]
                    tag = f"{_token(corridor.region_a)}_{_token(corridor.region_b)}_{period}_d{rd.day_index}_h{hour}"
                    terms_fwd = [(f_idx, 1.0)] + [(i, -1.0) for i, _ in cum_tx]
                    lp.add_row(f"txf_{tag}", "L", base_cap, terms_fwd)
                    terms_rev = [(f_idx, -1.0)] + [(i, -1.0) for i, _ in cum_tx]
                    lp.add_row(f"txr_{tag}", "L", base_cap, terms_rev)

    # --- storage rows --------------------------------------------------------
    if storage is not None:
        for region_id in region_ids:
            for p_i, period in enumerate(periods):
                cum_power = [
                    (stp_idx[(region_id, earlier)], 1.0)
                    for earlier in periods[: p_i + 1]
                ]
                cum_energy = [
                    (ste_idx[(region_id, earlier)], 1.0)
                    for earlier in periods[: p_i + 1]
                ]
                for rd in rep_days:
                    for hour in range(24):
                        args = (region_id, period, rd.day_index, hour)
                        nxt = (region_id, period, rd.day_index, (hour + 1) % 24)
                        tag = f"{_token(region_id)}_{period}_d{rd.day_index}_h{hour}"
                        # Cyclic within the representative day.
                        lp.add_row(
                            f"soc_{tag}", "E", 0.0,
                            [
                                (soc_idx[nxt], 1.0),
                                (soc_idx[args], -1.0),
                                (ch_idx[args], -storage.eff_charge),
                                (dis_idx[args], 1.0 / storage.eff_discharge),
                            ],
                        )
                        lp.add_row(
                            f"se_{tag}", "L", 0.0,
                            [(soc_idx[args], 1.0)] + [(i, -1.0) for i, _ in cum_energy],
                        )
                        lp.add_row(
                            f"sc_{tag}", "L", 0.0,
                            [(ch_idx[args], 1.0)] + [(i, -1.0) for i, _ in cum_power],
                        )
                        lp.add_row(
                            f"sd_{tag}", "L", 0.0,
                            [(dis_idx[args], 1.0)] + [(i, -1.0) for i, _ in cum_power],
                        )

    # --- energy balance ------------------------------------------------------
    units_by_region: dict[str, list[_Unit]] = {rid: [] for rid in region_ids}
    for unit in units:
        units_by_region[unit.region_id].append(unit)
    for region_id in region_ids:
        for period in periods:
            load = demand[(region_id, period)]
            for rd in rep_days:
                base_hour = rd.day_index * 24
                for hour in range(24):
                    terms: list[tuple[int, float]] = []
                    for unit in units_by_region[region_id]:
                        key = (unit.name, period, rd.day_index, hour)
                        if key in gen_idx:
                            terms.append((gen_idx[key], 1.0))
                    for corridor in problem.corridors:
                        key = (corridor.key, period, rd.day_index, hour)
                        if corridor.region_b == region_id:
                            terms.append((flow_idx[key], 1.0))
                        elif corridor.region_a == region_id:
                            terms.append((flow_idx[key], -1.0))
                    if storage is not None:
                        args = (region_id, period, rd.day_index, hour)
                        terms.append((dis_idx[args], 1.0))
                        terms.append((ch_idx[args], -1.0))
                    lp.add_row(
                        f"bal_{_token(region_id)}_{period}_d{rd.day_index}_h{hour}",
                        "E", float(load[base_hour + hour]), terms,
                    )

    # --- planning reserve ------------------------------------------------------
    peak_days = [rd for rd in rep_days if rd.is_peak]
    reserve_day = peak_days[0] if peak_days else max(
        rep_days,
        key=lambda rd: float(
            system_demand(problem, final_period)[rd.hours].max()
        ),
    )
    for p_i, period in enumerate(periods):
        sys_demand = system_demand(problem, period)
        peak_mw = float(sys_demand.max())
        day_hours = reserve_day.hours
        peak_hour = int(day_hours[np.argmax(sys_demand[day_hours])])
        terms = []
        firm_existing = 0.0
        for unit in units:
            cf_h = unit.cf_at(peak_hour)
            if unit.buildable:
                if cf_h > 0.0:
                    terms.extend(
                        (build_idx[(unit.name, earlier)], cf_h)
                        for earlier in periods[: p_i + 1]
                    )
                firm_existing += unit.existing_mw * cf_h
            else:
                firm_existing += unit.existing_mw * cf_h
        if storage is not None:
            for region_id in region_ids:
                terms.extend(
                    (stp_idx[(region_id, earlier)], 1.0)
                    for earlier in periods[: p_i + 1]
                )
        lp.add_row(
            f"reserve_{period}", "G",
            (1.0 + problem.reserve_margin) * peak_mw - firm_existing,
            terms,
        )

    # --- solar share in the final period ----------------------------------------
    if problem.solar_share_target > 0.0:
        weighted_demand = 0.0
        for region_id in region_ids:
            load = demand[(region_id, final_period)]
            for rd in rep_days:
                weighted_demand += rd.weight_days * float(load[rd.hours].sum())
        terms = []
        for unit in units:
            if not unit.is_solar:
                continue
            for rd in rep_days:
                for hour in range(24):
                    key = (unit.name, final_period, rd.day_index, hour)
                    if key in gen_idx:
                        terms.append((gen_idx[key], rd.weight_days))
        lp.add_row(
            f"share_{final_period}", "G",
            problem.solar_share_target * weighted_demand, terms,
        )

    # Fixed O&M owed on capacity that exists before any decision is made.
    constant = 0.0
    for unit in units:
        if unit.existing_mw <= 0 or unit.costs is None:
            continue
        constant += unit.existing_mw * sum(
            unit.costs[p].fixed_om_usd_per_kw_yr * 1000.0 for p in periods
        )

    return ExpansionLP(
        lp=lp, problem=problem, rep_days=rep_days, units=units,
        objective_constant=constant,
    )


@dataclass
class PlanResult:
    """A solved expansion plan plus audit residuals and report aggregates."""

    status: str
    objective_usd: float
    periods: list[int]
    rep_days: list[dict]
    builds_mw: dict[int, dict[str, float]]
    tx_builds_mw: dict[int, dict[str, float]]
    dispatch: dict[int, dict[int, dict]]
    solar_share_by_period: dict[int, float]
    solar_built_mw: float
    solar_annualized_fixed_cost_usd: float
    solar_capacity_weighted_mean_cf: float
    audits: dict[str, float]
    region_ids: list[str]
    technologies: list[str]

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "objective_usd": self.objective_usd,
            "periods": self.periods,
            "rep_days": self.rep_days,
            "builds_mw": {str(p): v for p, v in self.builds_mw.items()},
            "tx_builds_mw": {str(p): v for p, v in self.tx_builds_mw.items()},
            "dispatch": {
                str(p): {str(d): v for d, v in days.items()}
                for p, days in self.dispatch.items()
            },
            "solar_share_by_period": {
                str(p): v for p, v in self.solar_share_by_period.items()
            },
            "solar_built_mw": self.solar_built_mw,
            "solar_annualized_fixed_cost_usd": self.solar_annualized_fixed_cost_usd,
            "solar_capacity_weighted_mean_cf": self.solar_capacity_weighted_mean_cf,
            "audits": self.audits,
            "region_ids": self.region_ids,
            "technologies": self.technologies,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PlanResult":
        return cls(
            status=data["status"],
            objective_usd=data["objective_usd"],
            periods=list(data["periods"]),
            rep_days=list(data["rep_days"]),
            builds_mw={int(p): v for p, v in data["builds_mw"].items()},
            tx_builds_mw={int(p): v for p, v in data["tx_builds_mw"].items()},
            dispatch={
                int(p): {int(d): v for d, v in days.items()}
                for p, days in data["dispatch"].items()
            },
            solar_share_by_period={
                int(p): v for p, v in data["solar_share_by_period"].items()
            },
            solar_built_mw=data["solar_built_mw"],
            solar_annualized_fixed_cost_usd=data["solar_annualized_fixed_cost_usd"],
            solar_capacity_weighted_mean_cf=data["solar_capacity_weighted_mean_cf"],
            audits=data["audits"],
            region_ids=list(data["region_ids"]),
            technologies=list(data["technologies"]),
        )


def _check_share_reachable(problem: PlanningProblem, rep_days: list[RepDay]) -> None:
    if problem.solar_share_target <= 0.0:
        return
    final = problem.periods[-1]
    weights = np.zeros(HOURS_PER_YEAR)
    for rd in rep_days:
        weights[rd.hours] = rd.weight_days
    max_energy = 0.0
    for site in problem.solar_sites:
        cap = site.capacity_mw + 0.0
        max_energy += cap * float(np.dot(weights, np.asarray(site.cf.values)))
    for (region_id, tech), cap in problem.existing_mw.items():
        if tech == "solar":
            profile = _region_mean_cf(problem.solar_sites, region_id)
            max_energy += cap * float(np.dot(weights, profile))
    demand_energy = float(np.dot(weights, system_demand(problem, final)))
    required = problem.solar_share_target * demand_energy
    if max_energy < required * (1.0 - 1e-12):
        raise InfeasiblePlanError(
            "solar share unreachable",
            diagnosis={
                "binding": "solar_share_target",
                "target": problem.solar_share_target,
                "required_mwh": required,
                "max_solar_mwh": max_energy,
                "max_share": max_energy / demand_energy if demand_energy > 0 else 0.0,
            },
        )


def _extract(exp: ExpansionLP, sol: Solution) -> PlanResult:
    problem = exp.problem
    periods = problem.periods
    final_period = periods[-1]
    region_ids = sorted(r.region_id for r in problem.regions)

    builds: dict[int, dict[str, float]] = {p: {} for p in periods}
    solar_built = 0.0
    solar_fixed_cost = 0.0
    solar_cf_weighted = 0.0
    for unit in exp.units:
        if not unit.buildable:
            continue
        for period in periods:
            name = ExpansionLP.build_var(unit, period)
            value = sol.get(name, 0.0)
            builds[period][unit.key] = value
            if unit.is_solar:
                solar_built += value
                # Fixed cost of the solar fleet in the final period: each
                # vintage pays its own capital annuity, plus that year's
                # fixed O&M on the whole installed amount.
                vintage = unit.costs[period]
                solar_fixed_cost += value * (
                    crf(vintage.discount_rate, vintage.lifetime_yr)
                    * (vintage.capex_usd_per_kw * 1000.0
                       + unit.interconnect_usd_per_mw)
                    + unit.costs[final_period].fixed_om_usd_per_kw_yr * 1000.0
                )
                solar_cf_weighted += value * unit.mean_cf
    if problem.storage is not None:
        for region_id in region_ids:
            for period in periods:
                builds[period][f"storage_power:{region_id}"] = sol.get(
                    ExpansionLP.storage_var("bsp", region_id, period), 0.0
                )
                builds[period][f"storage_energy:{region_id}"] = sol.get(
                    ExpansionLP.storage_var("bse", region_id, period), 0.0
                )

    tx_builds: dict[int, dict[str, float]] = {p: {} for p in periods}
    for corridor in problem.corridors:
        if not corridor.expandable:
            continue
        for period in periods:
            tx_builds[period][corridor.key] = sol.get(
                ExpansionLP.tx_build_var(corridor, period), 0.0
            )

    dispatch: dict[int, dict[int, dict]] = {}
    share_by_period: dict[int, float] = {}
    for period in periods:
        dispatch[period] = {}
        solar_energy = 0.0
        demand_energy = 0.0
        for rd in exp.rep_days:
            gen: dict[str, list[float]] = {}
            for unit in exp.units:
                values = [
                    sol.get(
                        ExpansionLP.gen_var(unit, period, rd.day_index, h), 0.0
                    )
                    for h in range(24)
                ]
                gen[unit.key] = values
                if unit.is_solar:
                    solar_energy += rd.weight_days * sum(values)
            flows = {
                corridor.key: [
                    sol.get(
                        ExpansionLP.flow_var(corridor, period, rd.day_index, h),
                        0.0,
                    )
                    for h in range(24)
                ]
                for corridor in problem.corridors
            }
            day_demand: dict[str, list[float]] = {}
            for region in problem.regions:
                load = region.demand_by_period[period]
                day_demand[region.region_id] = [
                    float(load[rd.day_index * 24 + h]) for h in range(24)
                ]
                demand_energy += rd.weight_days * sum(day_demand[region.region_id])
            entry = {
                "weight_days": rd.weight_days,
                "is_peak": rd.is_peak,
                "gen_mw": gen,
                "flow_mw": flows,
                "demand_mw": day_demand,
            }
            if problem.storage is not None:
                entry["charge_mw"] = {
                    rid: [
                        sol.get(
                            ExpansionLP.storage_var("ch", rid, period,
                                                    rd.day_index, h), 0.0
                        )
                        for h in range(24)
                    ]
                    for rid in region_ids
                }
                entry["discharge_mw"] = {
                    rid: [
                        sol.get(
                            ExpansionLP.storage_var("dis", rid, period,
                                                    rd.day_index, h), 0.0
                        )
                        for h in range(24)
                    ]
                    for rid in region_ids
                }
                entry["soc_mwh"] = {
                    rid: [
                        sol.get(
                            ExpansionLP.storage_var("soc", rid, period,
                                                    rd.day_index, h), 0.0
                        )
                        for h in range(24)
                    ]
                    for rid in region_ids
                }
            dispatch[period][rd.day_index] = entry
        share_by_period[period] = (
            solar_energy / demand_energy if demand_energy > 0 else 0.0
        )

    technologies = sorted(
        {u.tech for u in exp.units} | {"storage"} if problem.storage else
        {u.tech for u in exp.units}
    )
    return PlanResult(
        status="optimal",
        objective_usd=float(sol.objective) + exp.objective_constant,
        periods=list(periods),
        rep_days=[
            {
                "day_index": rd.day_index,
                "weight_days": rd.weight_days,
                "is_peak": rd.is_peak,
            }
            for rd in exp.rep_days
        ],
        builds_mw=builds,
        tx_builds_mw=tx_builds,
        dispatch=dispatch,
        solar_share_by_period=share_by_period,
        solar_built_mw=solar_built,
        solar_annualized_fixed_cost_usd=solar_fixed_cost,
        solar_capacity_weighted_mean_cf=(
            solar_cf_weighted / solar_built if solar_built > 0 else 0.0
        ),
        audits={},
        region_ids=region_ids,
        technologies=technologies,
    )


def conservation_audit(result: PlanResult, problem: PlanningProblem) -> dict[str, float]:
    """Recompute energy-balance and storage-cycling residuals from a plan.

    Works purely from the extracted dispatch (independent of LP row
    encodings), so it also guards extraction bugs.  Returns the maximum
    relative balance residual and the maximum absolute storage residuals.
    """
    corridors = {c.key: c for c in problem.corridors}
    unit_region = _unit_regions(problem)
    max_balance = 0.0
    max_soc = 0.0
    max_cycle = 0.0
    storage = problem.storage
    for period, days in result.dispatch.items():
        for day_index, entry in days.items():
            gen = entry["gen_mw"]
            flows = entry["flow_mw"]
            for region_id in result.region_ids:
                demand = entry["demand_mw"][region_id]
                for h in range(24):
                    supplied = 0.0
                    for key, values in gen.items():
                        if unit_region[key] == region_id:
                            supplied += values[h]
                    for key, values in flows.items():
                        corridor = corridors[key]
                        if corridor.region_b == region_id:
                            supplied += values[h]
                        elif corridor.region_a == region_id:
                            supplied -= values[h]
                    if storage is not None:
                        supplied += entry["discharge_mw"][region_id][h]
                        supplied -= entry["charge_mw"][region_id][h]
                    residual = abs(supplied - demand[h]) / max(demand[h], 1.0)
                    max_balance = max(max_balance, residual)
            if storage is not None:
                for region_id in result.region_ids:
                    soc = entry["soc_mwh"][region_id]
                    ch = entry["charge_mw"][region_id]
                    dis = entry["discharge_mw"][region_id]
                    scale = max(max(soc), 1.0)
                    net = 0.0
                    for h in range(24):
                        nxt = (h + 1) % 24
                        step = (
                            soc[h]
                            + storage.eff_charge * ch[h]
                            - dis[h] / storage.eff_discharge
                        )
                        max_soc = max(max_soc, abs(soc[nxt] - step) / scale)
                        net += storage.eff_charge * ch[h] - dis[h] / storage.eff_discharge
                    max_cycle = max(max_cycle, abs(net) / scale)
    return {
        "max_balance_rel_residual": max_balance,
        "max_soc_rel_residual": max_soc,
        "max_cycle_rel_residual": max_cycle,
    }


def _unit_regions(problem: PlanningProblem) -> dict[str, str]:
    """Map every unit key a plan can contain to its region."""
    mapping: dict[str, str] = {}
    for site in problem.solar_sites:
        mapping[f"solar:{site.subdivision_id}"] = site.region_id
    for site in problem.wind_sites:
        mapping[f"wind:{site.subdivision_id}"] = site.region_id
    for tech in problem.thermal_costs:
        for region in problem.regions:
            mapping[f"{tech}:{region.region_id}"] = region.region_id
    for (region_id, tech) in problem.existing_mw:
        mapping[f"existing_{tech}:{region_id}"] = region_id
    return mapping


def run_plan(problem: PlanningProblem) -> PlanResult:
    """Assemble, solve, extract, and audit a full expansion plan."""
    if problem.myopic:
        return _run_plan_myopic(problem)
    rep_days = _resolve_rep_days(problem)
    _check_share_reachable(problem, rep_days)
    exp = assemble_lp(problem, rep_days)
    sol = exp.lp.solve()
    if sol.status == "infeasible":
        raise InfeasiblePlanError(
            "no feasible plan", diagnosis={"solver_message": sol.message}
        )
    if sol.status != "optimal":
        raise RuntimeError(f"expansion solve failed: {sol.status} ({sol.message})")
    result = _extract(exp, sol)
    result.audits = conservation_audit(result, problem)
    result.audits["max_lp_violation"] = exp.lp.max_violation(sol.x)
    worst = max(
        result.audits["max_balance_rel_residual"],
        result.audits["max_soc_rel_residual"],
        result.audits["max_cycle_rel_residual"],
    )
    if worst > _BALANCE_RTOL:
        raise RuntimeError(
            f"conservation audit failed: residual {worst:g} exceeds {_BALANCE_RTOL:g}"
        )
    return result


def _run_plan_myopic(problem: PlanningProblem) -> PlanResult:
    """Solve period by period, carrying builds forward as existing capacity."""
    import dataclasses

    rep_days = _resolve_rep_days(problem)
    prebuilt: dict[str, float] = dict(problem.prebuilt_mw)
    prebuilt_tx: dict[str, float] = dict(problem.prebuilt_tx_mw)
    final_period = problem.periods[-1]
    merged: PlanResult | None = None
    total_objective = 0.0
    for period in problem.periods:
        sub = dataclasses.replace(
            problem,
            periods=[period],
            myopic=False,
            rep_days=rep_days,
            solar_share_target=(
                problem.solar_share_target if period == final_period else 0.0
            ),
            prebuilt_mw=dict(prebuilt),
            prebuilt_tx_mw=dict(prebuilt_tx),
        )
        step = run_plan(sub)
        total_objective += step.objective_usd
        for key, value in step.builds_mw[period].items():
            prebuilt[key] = prebuilt.get(key, 0.0) + value
        for key, value in step.tx_builds_mw[period].items():
            prebuilt_tx[key] = prebuilt_tx.get(key, 0.0) + value
        if merged is None:
            merged = step
        else:
            merged.builds_mw[period] = step.builds_mw[period]
            merged.tx_builds_mw[period] = step.tx_builds_mw[period]
            merged.dispatch[period] = step.dispatch[period]
            merged.solar_share_by_period[period] = step.solar_share_by_period[period]
            merged.solar_built_mw += step.solar_built_mw
            merged.solar_annualized_fixed_cost_usd += (
                step.solar_annualized_fixed_cost_usd
            )
            for name, value in step.audits.items():
                merged.audits[name] = max(merged.audits.get(name, 0.0), value)
    assert merged is not None
    merged.periods = list(problem.periods)
    merged.objective_usd = total_objective
    solar_caps = {f"solar:{s.subdivision_id}": s.cf.mean_cf for s in problem.solar_sites}
    built_total = 0.0
    cf_weighted = 0.0
    for period in problem.periods:
        for key, value in merged.builds_mw[period].items():
            if key in solar_caps:
                built_total += value
                cf_weighted += value * solar_caps[key]
    merged.solar_capacity_weighted_mean_cf = (
        cf_weighted / built_total if built_total > 0 else 0.0
    )
    return merged
