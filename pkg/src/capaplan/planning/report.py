"""JSON projections of planning results for payloads, APIs, and transcripts."""

from __future__ import annotations

from typing import Any

from ..model import Literal, format_literal
from .problem import (
    CapabilityConstraintOrigin,
    FrameOrigin,
    GoalConstraintOrigin,
    Origin,
    Plan,
    PlanningResult,
    SatResult,
    StructuralOrigin,
    UnsatDiagnosis,
)
from .solve import ConflictPair


def literal_to_json(value: Literal) -> Any:
    if isinstance(value, (bool, int, str)):
        return value
    return format_literal(value)


def plan_to_json(plan: Plan) -> dict:
    return {
        "steps": [
            {
                "index": step.index,
                "capability": step.capability.value,
                "assignments": {
                    iri.value: literal_to_json(value) for iri, value in step.assignments
                },
            }
            for step in plan.steps
        ],
        "initial_state": {name: literal_to_json(v) for name, v in plan.initial_state},
        "goal_already_satisfied": plan.goal_already_satisfied,
    }


def origin_to_json(origin: Origin) -> dict:
    if isinstance(origin, CapabilityConstraintOrigin):
        return {
            "kind": "capability",
            "capability": origin.capability.value,
            "ordinal": origin.ordinal,
            "step": origin.step,
        }
    if isinstance(origin, GoalConstraintOrigin):
        return {"kind": "goal", "ordinal": origin.ordinal}
    if isinstance(origin, FrameOrigin):
        return {"kind": "frame", "property": origin.property_name, "step": origin.step}
    assert isinstance(origin, StructuralOrigin)
    return {"kind": "structure", "step": origin.step}


def diagnosis_to_json(diagnosis: UnsatDiagnosis) -> dict:
    return {
        "core": list(diagnosis.core),
        "origins": [origin_to_json(o) for o in diagnosis.origins],
        "horizon_tried": diagnosis.horizon_tried,
    }


def pair_to_json(pair: ConflictPair) -> dict:
    return {
        "goal_ordinal": pair.goal_ordinal,
        "goal_kind": pair.goal_kind,
        "capability": pair.capability.value,
        "capability_ordinals": list(pair.capability_ordinals),
        "shared_properties": list(pair.shared_properties),
    }


def result_to_json(result: PlanningResult, pairs: tuple[ConflictPair, ...] = ()) -> dict:
    if isinstance(result, SatResult):
        return {"verdict": "sat", "plan": plan_to_json(result.plan)}
    return {
        "verdict": "unsat",
        "diagnosis": diagnosis_to_json(result.diagnosis),
        "conflict_pairs": [pair_to_json(p) for p in pairs],
    }
