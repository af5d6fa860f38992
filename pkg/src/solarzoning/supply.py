"""Land supply curves and the capacity-loss waterfall decomposition.

The waterfall peels zoning constraints back one layer at a time in a fixed
cumulative order (outright bans, de facto bans from silence, road setbacks,
participating-line setbacks, non-participating-line setbacks, minimum lot
size, maximum lot size).  Stage k applies the first k layers of every
jurisdiction's baseline ordinance, so the per-layer reductions telescope:
they sum exactly to the unregulated-minus-baseline capacity gap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import ValidationError
from .geometry import developable_area, erode_by_setbacks
from .parcels import Parcel
from .resource import CapacityFactorSeries
from .zoning import EffectiveRule, OrdinanceRecord, ScenarioKind, effective_rule

W_PER_MW = 1e6


class ReductionLayer(enum.Enum):
    OUTRIGHT_BANS = "outright_bans"
    DE_FACTO_BANS = "de_facto_bans"
    ROAD_SETBACK = "road_setback"
    PPL_SETBACK = "ppl_setback"
    NPPL_SETBACK = "nppl_setback"
    MIN_LOT_SIZE = "min_lot_size"
    MAX_LOT_SIZE = "max_lot_size"


LAYER_ORDER: tuple[ReductionLayer, ...] = (
    ReductionLayer.OUTRIGHT_BANS,
    ReductionLayer.DE_FACTO_BANS,
    ReductionLayer.ROAD_SETBACK,
    ReductionLayer.PPL_SETBACK,
    ReductionLayer.NPPL_SETBACK,
    ReductionLayer.MIN_LOT_SIZE,
    ReductionLayer.MAX_LOT_SIZE,
)


@dataclass(frozen=True)
class SupplySite:
    """Aggregated developable capacity of one subdivision."""

    subdivision_id: str
    region_id: str
    capacity_mw: float
    lcoe_usd_per_mwh: float
    cf: CapacityFactorSeries
    interconnect_usd_per_mw: float = 0.0
    lcot_usd_per_mwh: float = 0.0

    def __post_init__(self):
        if self.capacity_mw < 0:
            raise ValidationError(
                f"site {self.subdivision_id!r}: capacity_mw must be non-negative"
            )
        if self.lcoe_usd_per_mwh < 0:
            raise ValidationError(
                f"site {self.subdivision_id!r}: lcoe must be non-negative"
            )


@dataclass
class SupplyCurve:
    """Sites sorted by cost with cumulative capacity."""

    label: str
    sites: list[SupplySite]
    points: list[tuple[float, float]]

    @property
    def total_mw(self) -> float:
        return self.points[-1][0] if self.points else 0.0

    def lcoe_at(self, cumulative_mw: float) -> float:
        """Cost of the marginal MW at a cumulative abscissa (step function)."""
        if cumulative_mw < 0:
            raise ValidationError("cumulative_mw must be non-negative")
        for cum, cost in self.points:
            if cumulative_mw <= cum:
                return cost
        raise ValidationError(
            f"curve {self.label!r} holds only {self.total_mw} MW, "
            f"requested {cumulative_mw}"
        )


def site_capacity_mw(developable_m2: float, power_density_w_per_m2: float) -> float:
    """Convert developable area to installable capacity."""
    if developable_m2 < 0:
        raise ValidationError("developable_m2 must be non-negative")
    if power_density_w_per_m2 <= 0:
        raise ValidationError("power_density_w_per_m2 must be positive")
    return developable_m2 * power_density_w_per_m2 / W_PER_MW


def build_supply_curve(sites: Iterable[SupplySite], label: str) -> SupplyCurve:
    """Sort positive-capacity sites by LCOE and accumulate capacity."""
    kept = sorted(
        (s for s in sites if s.capacity_mw > 0),
        key=lambda s: (s.lcoe_usd_per_mwh, s.subdivision_id),
    )
    points = []
    cum = 0.0
    for site in kept:
        cum += site.capacity_mw
        points.append((cum, site.lcoe_usd_per_mwh))
    return SupplyCurve(label, kept, points)


def top_fraction(sites: Sequence[SupplySite], fraction: float) -> list[SupplySite]:
    """Keep the cheapest-to-connect fraction of sites.

    Ranking is by levelized transmission cost with subdivision id as the
    tie-break; ``ceil(fraction * n)`` sites are retained.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValidationError("fraction must be within (0, 1]")
    ranked = sorted(sites, key=lambda s: (s.lcot_usd_per_mwh, s.subdivision_id))
    keep = math.ceil(fraction * len(ranked))
    return ranked[:keep]


@dataclass
class WaterfallResult:
    """Capacity totals per stage plus per-layer reductions and curves."""

    layer_order: tuple[ReductionLayer, ...]
    reductions_mw: dict[ReductionLayer, float]
    totals_mw: dict[str, float]
    curves: dict[str, SupplyCurve]

    @property
    def unregulated_mw(self) -> float:
        return self.totals_mw["unregulated"]

    @property
    def baseline_mw(self) -> float:
        return self.totals_mw["baseline"]


def _stage_label(k: int, order: tuple[ReductionLayer, ...]) -> str:
    if k == 0:
        return "unregulated"
    if k == len(order):
        return "baseline"
    return order[k - 1].value


def _stage_rule(rule: EffectiveRule, layers: set[ReductionLayer]) -> EffectiveRule:
    """Baseline rule with only the given setback/lot-size layers active."""
    return EffectiveRule.permitted(
        road=rule.road_setback_m if ReductionLayer.ROAD_SETBACK in layers else 0.0,
        ppl=rule.ppl_setback_m if ReductionLayer.PPL_SETBACK in layers else 0.0,
        nppl=rule.nppl_setback_m if ReductionLayer.NPPL_SETBACK in layers else 0.0,
        min_lot=rule.min_lot_size_m2 if ReductionLayer.MIN_LOT_SIZE in layers else 0.0,
        max_lot=rule.max_lot_size_m2 if ReductionLayer.MAX_LOT_SIZE in layers else math.inf,
    )


def waterfall(
    parcels: Sequence[Parcel],
    records: Sequence[OrdinanceRecord],
    *,
    power_density_w_per_m2: float,
    unzoned_defaults: EffectiveRule,
    site_factory: Callable[[str, float], SupplySite] | None = None,
    layer_order: tuple[ReductionLayer, ...] = LAYER_ORDER,
) -> WaterfallResult:
    """Decompose the unregulated-to-baseline capacity gap layer by layer.

    ``site_factory(subdivision_id, capacity_mw)`` builds the SupplySite used
    in each stage's curve (injecting cost and cf data); when omitted the
    curves carry flat zero costs and only the totals are meaningful.
    Parcels referencing a jurisdiction absent from ``records`` are an error.
    """
    if len(layer_order) != len(LAYER_ORDER) or set(layer_order) != set(LAYER_ORDER):
        raise ValidationError("layer_order must be a permutation of all layers")
    by_jurisdiction = {rec.jurisdiction_id: rec for rec in records}
    missing = {p.subdivision_id for p in parcels} - set(by_jurisdiction)
    if missing:
        raise ValidationError(
            f"parcels reference unknown jurisdictions: {sorted(missing)}"
        )

    n_stages = len(layer_order) + 1
    stage_layers = [set(layer_order[:k]) for k in range(n_stages)]
    stage_caps: list[dict[str, float]] = [dict() for _ in range(n_stages)]

    for parcel in parcels:
        rec = by_jurisdiction[parcel.subdivision_id]
        base_rule = effective_rule(rec, ScenarioKind.BASELINE, unzoned_defaults)
        outright_ban = rec.zoned and not rec.silent and not rec.allows_ses_in_ag
        de_facto_ban = rec.zoned and rec.silent
        parcel_area = parcel.area_m2
        erosion_cache: dict[tuple, float] = {}
        for k in range(n_stages):
            layers = stage_layers[k]
            if outright_ban and ReductionLayer.OUTRIGHT_BANS in layers:
                area = 0.0
            elif de_facto_ban and ReductionLayer.DE_FACTO_BANS in layers:
                area = 0.0
            elif base_rule.banned:
                # Banned jurisdictions have no numeric rules; before the ban
                # layer applies, their land counts in full.
                area = parcel_area
            else:
                stage = _stage_rule(base_rule, layers)
                key = (stage.road_setback_m, stage.ppl_setback_m, stage.nppl_setback_m)
                if key not in erosion_cache:
                    if key == (0.0, 0.0, 0.0):
                        erosion_cache[key] = parcel_area
                    else:
                        erosion_cache[key] = erode_by_setbacks(parcel, stage).area_m2
                area = erosion_cache[key]
                if stage.min_lot_size_m2 > 0 and parcel_area < stage.min_lot_size_m2:
                    area = 0.0
                elif area > stage.max_lot_size_m2:
                    area = stage.max_lot_size_m2
            cap = site_capacity_mw(area, power_density_w_per_m2)
            stage_caps[k][parcel.subdivision_id] = (
                stage_caps[k].get(parcel.subdivision_id, 0.0) + cap
            )

    if site_factory is None:
        def site_factory(subdivision_id: str, capacity_mw: float) -> SupplySite:
            return SupplySite(
                subdivision_id=subdivision_id,
                region_id="",
                capacity_mw=capacity_mw,
                lcoe_usd_per_mwh=0.0,
                cf=_FLAT_CF,
            )

    totals: dict[str, float] = {}
    curves: dict[str, SupplyCurve] = {}
    stage_totals: list[float] = []
    for k in range(n_stages):
        label = _stage_label(k, layer_order)
        sites = [
            site_factory(sub_id, cap)
            for sub_id, cap in sorted(stage_caps[k].items())
        ]
        total = float(sum(cap for cap in stage_caps[k].values()))
        stage_totals.append(total)
        totals[label] = total
        curves[label] = build_supply_curve(sites, label)

    reductions = {
        layer: stage_totals[k] - stage_totals[k + 1]
        for k, layer in enumerate(layer_order)
    }
    return WaterfallResult(
        layer_order=tuple(layer_order),
        reductions_mw=reductions,
        totals_mw=totals,
        curves=curves,
    )


def scenario_capacity_by_subdivision(
    parcels: Sequence[Parcel],
    rules: dict[str, EffectiveRule],
    power_density_w_per_m2: float,
) -> dict[str, float]:
    """Developable capacity (MW) per subdivision under resolved rules."""
    missing = {p.subdivision_id for p in parcels} - set(rules)
    if missing:
        raise ValidationError(
            f"parcels reference unknown jurisdictions: {sorted(missing)}"
        )
    caps: dict[str, float] = {}
    for parcel in parcels:
        dev = developable_area(parcel, rules[parcel.subdivision_id])
        cap = site_capacity_mw(dev.area_m2, power_density_w_per_m2)
        caps[parcel.subdivision_id] = caps.get(parcel.subdivision_id, 0.0) + cap
    return caps


class _FlatCF:
    """Stand-in cf for cost-free curves built without a site factory."""

    def __getattr__(self, name):
        raise ValidationError(
            "waterfall curves built without a site_factory carry no cf data"
        )


_FLAT_CF = _FlatCF()
