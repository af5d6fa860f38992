"""Planner correctness on hand instances with closed-form optima."""

from __future__ import annotations

import io

import pytest

from helpers_lp import PERIOD, SOLVABLE_INSTANCES, infeasible_share_target
from solarzoning.errors import InfeasiblePlanError
from solarzoning.expansion.model import assemble_lp, run_plan
from solarzoning.expansion.mps import read_mps, write_mps
from solarzoning.expansion.reference import solve_reference

RTOL = 1e-6


def _rel(a, b):
    scale = max(abs(a), abs(b), 1.0)
    return abs(a - b) / scale


@pytest.mark.parametrize("name", sorted(SOLVABLE_INSTANCES))
def test_hand_instance_matches_analytic_optimum(name):
    problem, expected = SOLVABLE_INSTANCES[name]()
    result = run_plan(problem)
    assert result.status == "optimal"
    assert _rel(result.objective_usd, expected["objective"]) < RTOL
    for key, mw in expected["builds"].items():
        got = result.builds_mw[PERIOD].get(key, 0.0)
        assert _rel(got, mw) < RTOL, f"{name}: {key} built {got}, expected {mw}"


def test_infeasible_share_target_is_diagnosed():
    problem, _ = infeasible_share_target()
    with pytest.raises(InfeasiblePlanError) as err:
        run_plan(problem)
    assert "share" in str(err.value)
    assert err.value.diagnosis["binding"] == "solar_share_target"
    assert err.value.diagnosis["max_share"] < 0.9


@pytest.mark.parametrize("name", sorted(SOLVABLE_INSTANCES))
def test_mps_round_trip_preserves_the_model(name):
    problem, _ = SOLVABLE_INSTANCES[name]()
    exp = assemble_lp(problem)
    buffer = io.StringIO()
    write_mps(exp.lp, buffer)
    buffer.seek(0)
    clone = read_mps(buffer)
    assert clone.n_vars == exp.lp.n_vars
    assert clone.n_rows == exp.lp.n_rows
    direct = exp.lp.solve()
    round_tripped = clone.solve()
    assert direct.status == round_tripped.status == "optimal"
    assert _rel(direct.objective, round_tripped.objective) < RTOL


@pytest.mark.parametrize("name", sorted(SOLVABLE_INSTANCES))
def test_independent_solver_agrees_via_mps(name):
    """Export to MPS, solve with the GLPK-based reference, compare optima."""
    problem, expected = SOLVABLE_INSTANCES[name]()
    exp = assemble_lp(problem)
    buffer = io.StringIO()
    write_mps(exp.lp, buffer)
    buffer.seek(0)
    reference = solve_reference(read_mps(buffer))
    assert reference.status == "optimal"
    ours = exp.lp.solve()
    assert _rel(reference.objective, ours.objective) < RTOL
    assert _rel(reference.objective, expected["objective"]) < RTOL


def test_audits_pass_on_hand_instances():
    for name, build in SOLVABLE_INSTANCES.items():
        problem, _ = build()
        result = run_plan(problem)
        assert result.audits, name
        worst = max(result.audits.values())
        assert worst <= 1e-6, f"{name}: worst audit residual {worst}"
