"""Bounded-horizon planning: encoding, solving, diagnosis, and the oracle."""

import random
from fractions import Fraction

import pytest

from capaplan.model import Iri
from capaplan.planning import (
    PlanningError,
    PlanningProblem,
    SatResult,
    UnsatResult,
    clear_solve_cache,
    conflict_pairs,
    encode,
    oracle_solve,
    replay_plan,
    solve,
)
from capaplan.planning.oracle import random_instance


def problem(goal, model, horizon=3, grids=None):
    return PlanningProblem(Iri(goal), model, max_horizon=horizon, grids=grids or {})


def test_drill_goal_plans_robot_then_drill(plant_model):
    result = solve(problem("urn:mps:req:drill7", plant_model))
    assert isinstance(result, SatResult)
    steps = [s.capability.value for s in result.plan.steps]
    assert steps == ["urn:mps:cap:robot", "urn:mps:cap:drill"]
    assignments = {}
    for step in result.plan.steps:
        assignments.update(step.assignments)
    assert assignments[Iri("urn:mps:cap:drill:out:depth")] == Fraction(7)
    assert replay_plan(result.plan, problem("urn:mps:req:drill7", plant_model))


def test_single_step_transport(plant_model):
    result = solve(problem("urn:mps:req:transport17", plant_model))
    assert isinstance(result, SatResult)
    assert [s.capability.value for s in result.plan.steps] == ["urn:mps:cap:robot"]


def test_already_satisfied_goal_is_sat_with_short_plan(plant_model):
    result = solve(problem("urn:mps:req:stay1", plant_model))
    assert isinstance(result, SatResult)
    assert len(result.plan.steps) <= 1
    assert replay_plan(result.plan, problem("urn:mps:req:stay1", plant_model))


def test_unreachable_station_is_unsat_with_transport_pairs(plant_model):
    result = solve(problem("urn:mps:req:move39", plant_model))
    assert isinstance(result, UnsatResult)
    _, index = encode(
        problem("urn:mps:req:move39", plant_model), result.diagnosis.horizon_tried
    )
    pairs = {
        (p.goal_ordinal, p.capability.value)
        for p in conflict_pairs(result.diagnosis, index)
    }
    assert pairs == {
        (1, "urn:mps:cap:conveyor"),
        (1, "urn:mps:cap:robot"),
        (1, "urn:mps:cap:supply"),
    }


def test_two_independent_conflicts_both_reported(depth_station_model):
    result = solve(problem("urn:fix:req:hole", depth_station_model, horizon=2))
    assert isinstance(result, UnsatResult)
    _, index = encode(
        problem("urn:fix:req:hole", depth_station_model),
        result.diagnosis.horizon_tried,
    )
    pairs = conflict_pairs(result.diagnosis, index)
    shape = {
        (p.goal_ordinal, p.capability.value, tuple(sorted(p.shared_properties)))
        for p in pairs
    }
    assert shape == {
        (2, "urn:fix:cap:drill", ("depth",)),
        (3, "urn:fix:cap:drill", ("stationId",)),
    }


def test_solve_results_are_cached(plant_model):
    clear_solve_cache()
    p = problem("urn:mps:req:drill7", plant_model)
    first = solve(p)
    second = solve(problem("urn:mps:req:drill7", plant_model))
    assert first is second
    clear_solve_cache()


def test_unbound_goal_property_without_grid_raises(plant_model):
    # drop the depth demand's grid route: goal deep12 is fine, but a goal
    # whose non-product input has no value and no grid cannot be replayed
    result = solve(problem("urn:mps:req:deep12", plant_model))
    assert isinstance(result, UnsatResult)


@pytest.mark.parametrize("seed", range(30))
def test_oracle_agreement_sample(seed):
    instance = random_instance(random.Random(seed))
    expected = oracle_solve(instance)
    result = solve(instance)
    if expected is None:
        assert isinstance(result, UnsatResult)
    else:
        assert isinstance(result, SatResult)
        assert replay_plan(result.plan, instance)


def test_replay_rejects_wrong_plan(plant_model):
    p = problem("urn:mps:req:transport17", plant_model)
    result = solve(p)
    assert isinstance(result, SatResult)
    # replaying against a different goal must fail
    other = problem("urn:mps:req:move39", plant_model)
    assert replay_plan(result.plan, other) is False


def test_unknown_goal_raises(plant_model):
    with pytest.raises(Exception):
        solve(problem("urn:mps:req:missing", plant_model))
