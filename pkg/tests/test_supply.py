"""Supply curves, capacity screens, and the reduction waterfall."""

from __future__ import annotations

import numpy as np
import pytest

from solarzoning.errors import ValidationError
from solarzoning.resource import CapacityFactorSeries
from solarzoning.supply import (
    LAYER_ORDER,
    ReductionLayer,
    SupplySite,
    build_supply_curve,
    scenario_capacity_by_subdivision,
    site_capacity_mw,
    top_fraction,
    waterfall,
)
from solarzoning.zoning import DEFAULT_UNZONED_RULE, ScenarioKind, scenario_rules


def _site(sid, cap, lcoe_value, lcot=0.0):
    values = np.full(8760, 0.2)
    cf = CapacityFactorSeries(sid, values, float(values.mean()))
    return SupplySite(
        subdivision_id=sid, region_id="R1", capacity_mw=cap,
        lcoe_usd_per_mwh=lcoe_value, cf=cf, lcot_usd_per_mwh=lcot,
    )


def test_site_capacity_conversion():
    # 35 W/m2 over one square kilometre is 35 MW.
    assert site_capacity_mw(1_000_000.0, 35.0) == pytest.approx(35.0)
    assert site_capacity_mw(0.0, 35.0) == 0.0


def test_supply_curve_sorts_by_price_then_id():
    sites = [_site("B", 5.0, 42.0), _site("A", 10.0, 42.0), _site("C", 7.0, 30.0)]
    curve = build_supply_curve(sites, "demo")
    assert [s.subdivision_id for s in curve.sites] == ["C", "A", "B"]
    cumulative = [p[0] for p in curve.points]
    assert cumulative == pytest.approx([7.0, 17.0, 22.0])
    prices = [p[1] for p in curve.points]
    assert prices == sorted(prices)


def test_top_fraction_keeps_cheapest_interconnection():
    sites = [_site(f"S{k}", 10.0, 50.0, lcot=float(k)) for k in range(10)]
    kept = top_fraction(sites, 0.3)
    assert [s.subdivision_id for s in kept] == ["S0", "S1", "S2"]
    assert len(top_fraction(sites, 1.0)) == 10
    # Ceiling semantics: 25% of 10 sites keeps 3.
    assert len(top_fraction(sites, 0.25)) == 3
    with pytest.raises(ValidationError):
        top_fraction(sites, 0.0)
    with pytest.raises(ValidationError):
        top_fraction(sites, 1.5)


def test_top_fraction_breaks_ties_by_id():
    sites = [_site(sid, 10.0, 50.0, lcot=7.0) for sid in ("SB", "SA", "SC")]
    kept = top_fraction(sites, 2 / 3)
    assert [s.subdivision_id for s in kept] == ["SA", "SB"]


def _waterfall(demo_records, all_parcels, order=LAYER_ORDER):
    parcels = [p for plist in all_parcels.values() for p in plist]
    return waterfall(
        parcels,
        demo_records,
        power_density_w_per_m2=35.0,
        unzoned_defaults=DEFAULT_UNZONED_RULE,
        layer_order=order,
    )


@pytest.fixture(scope="module")
def demo_waterfall(demo_records, all_parcels):
    return _waterfall(demo_records, all_parcels)


def test_waterfall_reductions_telescope(demo_waterfall):
    fall = demo_waterfall
    total_reduction = sum(fall.reductions_mw.values())
    gap = fall.unregulated_mw - fall.baseline_mw
    assert total_reduction == pytest.approx(gap, rel=1e-12)
    assert fall.unregulated_mw > fall.baseline_mw > 0


def test_waterfall_stage_totals_are_monotone(demo_waterfall):
    fall = demo_waterfall
    labels = ["unregulated"] + [layer.value for layer in LAYER_ORDER[:-1]] + ["baseline"]
    totals = [fall.totals_mw[label] for label in labels]
    assert len(totals) == len(LAYER_ORDER) + 1
    for a, b in zip(totals, totals[1:]):
        assert a >= b - 1e-9


def test_waterfall_reductions_are_nonnegative(demo_waterfall):
    for layer, value in demo_waterfall.reductions_mw.items():
        assert value >= -1e-9, layer


def test_waterfall_endpoints_invariant_to_layer_order(demo_records, all_parcels):
    reordered = (
        ReductionLayer.MAX_LOT_SIZE,
        ReductionLayer.NPPL_SETBACK,
        ReductionLayer.OUTRIGHT_BANS,
        ReductionLayer.MIN_LOT_SIZE,
        ReductionLayer.DE_FACTO_BANS,
        ReductionLayer.PPL_SETBACK,
        ReductionLayer.ROAD_SETBACK,
    )
    base = _waterfall(demo_records, all_parcels)
    other = _waterfall(demo_records, all_parcels, order=reordered)
    assert other.unregulated_mw == pytest.approx(base.unregulated_mw, rel=1e-12)
    assert other.baseline_mw == pytest.approx(base.baseline_mw, rel=1e-12)
    assert sum(other.reductions_mw.values()) == pytest.approx(
        sum(base.reductions_mw.values()), rel=1e-9
    )


def test_waterfall_rejects_partial_layer_order(demo_records, all_parcels):
    with pytest.raises(ValidationError):
        _waterfall(demo_records, all_parcels, order=LAYER_ORDER[:3])


def test_scenario_capacities_shrink_with_regulation(demo_records, all_parcels):
    parcels = [p for plist in all_parcels.values() for p in plist]
    unregulated = scenario_capacity_by_subdivision(
        parcels, scenario_rules(demo_records, ScenarioKind.UNREGULATED), 35.0
    )
    baseline = scenario_capacity_by_subdivision(
        parcels, scenario_rules(demo_records, ScenarioKind.BASELINE), 35.0
    )
    progressive = scenario_capacity_by_subdivision(
        parcels,
        scenario_rules(demo_records, ScenarioKind.PROGRESSIVE, seed=4),
        35.0,
    )
    assert sorted(unregulated) == sorted(baseline) == sorted(progressive)
    for sid in unregulated:
        assert baseline[sid] <= progressive[sid] + 1e-9
        assert progressive[sid] <= unregulated[sid] + 1e-9
    banned = [sid for sid, mw in baseline.items() if mw == 0.0]
    assert banned, "the demo region should ban at least one subdivision"
