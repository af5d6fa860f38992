"""Expansion-model behavior beyond raw LP optima: representative days,
multi-period cost accounting, myopic solves, audits, and serialization."""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np
import pytest

from helpers_lp import CCGT, ONE_DAY, PERIOD, _flat_region, single_tech_sizing, storage_arbitrage
from solarzoning.errors import ValidationError
from solarzoning.expansion.model import (
    SEASON_OF_DAY,
    PlanResult,
    PlanningProblem,
    conservation_audit,
    run_plan,
    select_rep_days,
)
from solarzoning.resource import crf


# ---------------------------------------------------------------------------
# representative-day selection
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def demo_rep_days(run_pair):
    artifacts, _ = run_pair["unregulated"]
    return artifacts.problem.rep_days


def test_rep_day_count_and_weights(demo_rep_days, demo_config):
    days = demo_rep_days
    assert len(days) == 4 * demo_config.days_per_season + 1
    assert sum(d.weight_days for d in days) == pytest.approx(365.0, rel=1e-12)
    peaks = [d for d in days if d.is_peak]
    assert len(peaks) == 1
    assert peaks[0].weight_days == 1.0
    indices = [d.day_index for d in days]
    assert indices == sorted(indices)
    assert len(set(indices)) == len(indices)
    assert all(0 <= i < 365 for i in indices)


def test_rep_days_cover_every_season(demo_rep_days, demo_config):
    non_peak = [d for d in demo_rep_days if not d.is_peak]
    per_season = {season: 0 for season in range(4)}
    for day in non_peak:
        per_season[int(SEASON_OF_DAY[day.day_index])] += 1
    assert all(n == demo_config.days_per_season for n in per_season.values())


def test_peak_day_holds_the_annual_maximum(demo_rep_days, demo_inputs, demo_config):
    final = demo_config.periods[-1]
    total = np.zeros(8760)
    for region_id in sorted(demo_inputs.demand):
        total += demo_inputs.demand[region_id][final]
    peak = next(d for d in demo_rep_days if d.is_peak)
    assert int(np.argmax(total)) // 24 == peak.day_index


def test_select_rep_days_is_deterministic(demo_inputs, demo_config):
    final = demo_config.periods[-1]
    total = np.zeros(8760)
    for region_id in sorted(demo_inputs.demand):
        total += demo_inputs.demand[region_id][final]
    first = select_rep_days(total, [], 2)
    second = select_rep_days(total, [], 2)
    assert first == second


def test_select_rep_days_validates_inputs():
    with pytest.raises(ValidationError):
        select_rep_days(np.zeros(100), [], 2)
    with pytest.raises(ValidationError):
        select_rep_days(np.zeros(8760), [], 0)


# ---------------------------------------------------------------------------
# cost accounting across periods
# ---------------------------------------------------------------------------


def _two_period_single_tech(myopic):
    periods = [2030, 2034]
    demand = np.full(8760, 100.0)
    region = dataclasses.replace(
        _flat_region("R1", 100.0), demand_by_period={p: demand for p in periods}
    )
    base, _ = single_tech_sizing()
    return dataclasses.replace(
        base,
        periods=periods,
        regions=[region],
        solar_costs={p: base.solar_costs[PERIOD] for p in periods},
        wind_costs={p: base.wind_costs[PERIOD] for p in periods},
        thermal_costs={"ccgt": {p: CCGT for p in periods}},
        myopic=myopic,
    )


def _ccgt_annuity():
    return crf(CCGT.discount_rate, CCGT.lifetime_yr) * CCGT.capex_usd_per_kw * 1000.0


def test_joint_plan_pays_annuity_in_every_serving_period():
    result = run_plan(_two_period_single_tech(myopic=False))
    builds = result.builds_mw
    assert builds[2030]["ccgt:R1"] == pytest.approx(115.0, rel=1e-6)
    assert builds[2034].get("ccgt:R1", 0.0) == pytest.approx(0.0, abs=1e-6)
    energy_cost = 365.0 * 24.0 * 100.0 * (CCGT.variable_om_usd_per_mwh + CCGT.fuel_usd_per_mwh)
    fixed = _ccgt_annuity() + CCGT.fixed_om_usd_per_kw_yr * 1000.0
    # The 2030 vintage serves both modeled periods, so it owes two annual
    # capital payments and two years of fixed O&M.
    expected = 115.0 * 2.0 * fixed + 2.0 * energy_cost
    assert result.objective_usd == pytest.approx(expected, rel=1e-6)


def test_myopic_plan_carries_builds_forward():
    result = run_plan(_two_period_single_tech(myopic=True))
    assert result.builds_mw[2030]["ccgt:R1"] == pytest.approx(115.0, rel=1e-6)
    assert result.builds_mw[2034].get("ccgt:R1", 0.0) == pytest.approx(0.0, abs=1e-6)
    energy_cost = 365.0 * 24.0 * 100.0 * (CCGT.variable_om_usd_per_mwh + CCGT.fuel_usd_per_mwh)
    # Each myopic step prices one year: the build year pays capital plus
    # fixed O&M, the carried year pays fixed O&M on what already stands.
    first = 115.0 * (_ccgt_annuity() + CCGT.fixed_om_usd_per_kw_yr * 1000.0) + energy_cost
    second = 115.0 * CCGT.fixed_om_usd_per_kw_yr * 1000.0 + energy_cost
    assert result.objective_usd == pytest.approx(first + second, rel=1e-6)
    assert max(result.audits.values()) <= 1e-6


def test_raising_reserve_margin_prices_extra_capacity():
    problem, _ = single_tech_sizing()
    low = run_plan(problem)
    high = run_plan(dataclasses.replace(problem, reserve_margin=0.30))
    extra_mw = 100.0 * (0.30 - 0.15)
    expected_delta = extra_mw * (_ccgt_annuity() + CCGT.fixed_om_usd_per_kw_yr * 1000.0)
    assert high.objective_usd - low.objective_usd == pytest.approx(expected_delta, rel=1e-6)


def test_zero_demand_plan_costs_nothing():
    problem, _ = single_tech_sizing()
    region = dataclasses.replace(
        problem.regions[0], demand_by_period={PERIOD: np.zeros(8760)}
    )
    result = run_plan(dataclasses.replace(problem, regions=[region], rep_days=ONE_DAY))
    assert result.objective_usd == pytest.approx(0.0, abs=1e-6)
    assert all(v == pytest.approx(0.0, abs=1e-9) for v in result.builds_mw[PERIOD].values())


# ---------------------------------------------------------------------------
# audits and dispatch structure
# ---------------------------------------------------------------------------


AUDIT_KEYS = {
    "max_balance_rel_residual",
    "max_soc_rel_residual",
    "max_cycle_rel_residual",
    "max_lp_violation",
}


def test_demo_audits_are_clean(run_pair):
    for scenario, (artifacts, _) in run_pair.items():
        result = artifacts.result
        assert set(result.audits) == AUDIT_KEYS, scenario
        assert max(result.audits.values()) <= 1e-6, scenario
        recomputed = conservation_audit(result, artifacts.problem)
        for name, value in recomputed.items():
            assert value <= 1e-6, (scenario, name)


def test_storage_cycles_back_to_start_each_day():
    problem, _ = storage_arbitrage()
    result = run_plan(problem)
    eta = math.sqrt(0.85)
    entry = result.dispatch[PERIOD][0]
    soc = entry["soc_mwh"]["R1"]
    charge = entry["charge_mw"]["R1"]
    discharge = entry["discharge_mw"]["R1"]
    scale = max(soc)
    assert scale > 0
    net = 0.0
    for hour in range(24):
        step = soc[hour] + eta * charge[hour] - discharge[hour] / eta
        assert abs(soc[(hour + 1) % 24] - step) <= 1e-6 * scale
        net += eta * charge[hour] - discharge[hour] / eta
    assert abs(net) <= 1e-6 * scale
    # Night hours have no other source, so storage alone carries the load.
    for hour in list(range(0, 8)) + list(range(16, 24)):
        assert discharge[hour] == pytest.approx(100.0, rel=1e-6)


def test_final_period_share_target_binds(run_pair, demo_config):
    final = demo_config.periods[-1]
    for scenario, (artifacts, _) in run_pair.items():
        share = artifacts.result.solar_share_by_period[final]
        assert share == pytest.approx(demo_config.solar_share_target, abs=1e-5), scenario


def test_solar_report_aggregates_are_consistent(run_pair):
    for scenario, (artifacts, _) in run_pair.items():
        result = artifacts.result
        mean_cf = {
            f"solar:{s.subdivision_id}": s.cf.mean_cf
            for s in artifacts.problem.solar_sites
        }
        built = 0.0
        weighted = 0.0
        for period_builds in result.builds_mw.values():
            for key, mw in period_builds.items():
                if key in mean_cf:
                    built += mw
                    weighted += mw * mean_cf[key]
        assert result.solar_built_mw == pytest.approx(built, rel=1e-9), scenario
        assert result.solar_capacity_weighted_mean_cf == pytest.approx(
            weighted / built, rel=1e-9
        ), scenario
        assert result.solar_annualized_fixed_cost_usd > 0, scenario


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_plan_result_survives_json_round_trip():
    problem, _ = storage_arbitrage()
    result = run_plan(problem)
    payload = json.loads(json.dumps(result.to_json_dict(), sort_keys=True))
    restored = PlanResult.from_json_dict(payload)
    assert restored == result
