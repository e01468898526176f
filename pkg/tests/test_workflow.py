"""Workflow engine: paths, checkpoints, and decision hygiene."""

import pytest

from capaplan.llm import FinalAnswer, ScriptEntry, ScriptedProvider, ToolCall
from capaplan.model import parse_model
from capaplan.store import GraphStore
from capaplan.workflow import (
    HitlDecision,
    IllegalEventError,
    StaleDecisionError,
    Workflow,
    WorkflowConfig,
    WorkflowError,
)

from conftest import FIXTURES

V = "urn:cap:v1#"


def provider_of(*entries):
    return ScriptedProvider([ScriptEntry(a, m, tuple(r), rep) for a, m, r, rep in entries])


def plant_workflow(*entries, **config):
    store = GraphStore.load(
        parse_model((FIXTURES / "mps500.json").read_text(encoding="utf-8"))
    )
    workflow = Workflow(store, provider_of(*entries),
                        WorkflowConfig(max_horizon=3, **config))
    return workflow, store


def test_knowledge_path_answers_directly():
    query = f'SELECT ?d WHERE {{ <urn:mps:cap:drill> <{V}description> ?d . }}'
    row = ["Drills a hole with depth 5 mm to 10 mm at station 3"]
    workflow, _ = plant_workflow(
        ("router", "", [FinalAnswer({"intent": "knowledge_query"})], False),
        ("knowledge", "", [
            ToolCall("select", {"query": query}),
            FinalAnswer({"answer": "5 to 10 mm",
                         "supporting_rows": [{"query": query, "row": row}]}),
        ], False),
    )
    state = workflow.start_session()
    workflow.step(state, "what depth?")
    assert state.status == "awaiting_user"
    assert state.visited_nodes == ["router", "knowledge"]
    assert state.transcript[-1]["text"] == "5 to 10 mm"


def test_goal_confirmation_gates_planning():
    workflow, _ = plant_workflow(
        ("router", "", [FinalAnswer({"intent": "planning_request"})], True),
        ("candidates", "", [FinalAnswer({"candidates": ["urn:mps:req:drill7"]})], False),
        ("planner", "", [ToolCall("run_planner", {}),
                         FinalAnswer({"commentary": "ok"})], True),
    )
    state = workflow.start_session()
    workflow.step(state, "drill a hole")
    assert state.status == "awaiting_hitl"
    assert state.pending_hitl.checkpoint == "confirm_goal"
    workflow.step(state, HitlDecision(state.pending_hitl.request_id, "approve"))
    assert state.status == "done"
    assert state.last_result["verdict"] == "sat"


def test_modify_decision_overrides_goal():
    workflow, _ = plant_workflow(
        ("router", "", [FinalAnswer({"intent": "planning_request"})], True),
        ("candidates", "", [FinalAnswer(
            {"candidates": ["urn:mps:req:drill7", "urn:mps:req:transport17"]})], False),
        ("planner", "", [ToolCall("run_planner", {}),
                         FinalAnswer({"commentary": "ok"})], True),
    )
    state = workflow.start_session()
    workflow.step(state, "do the thing")
    workflow.step(state, HitlDecision(
        state.pending_hitl.request_id, "modify",
        payload={"goal": "urn:mps:req:transport17"},
    ))
    assert state.confirmed_goal == "urn:mps:req:transport17"
    assert state.status == "done"


def test_user_message_rejected_while_awaiting_hitl():
    workflow, _ = plant_workflow(
        ("router", "", [FinalAnswer({"intent": "planning_request"})], True),
        ("candidates", "", [FinalAnswer({"candidates": ["urn:mps:req:drill7"]})], False),
    )
    state = workflow.start_session()
    workflow.step(state, "drill a hole")
    with pytest.raises(IllegalEventError):
        workflow.step(state, "another message")


def test_stale_decision_rejected():
    workflow, _ = plant_workflow(
        ("router", "", [FinalAnswer({"intent": "planning_request"})], True),
        ("candidates", "", [FinalAnswer({"candidates": ["urn:mps:req:drill7"]})], False),
    )
    state = workflow.start_session()
    workflow.step(state, "drill a hole")
    with pytest.raises(StaleDecisionError):
        workflow.step(state, HitlDecision("s-1-h999", "approve"))
    # the real request is still pending and usable
    assert state.pending_hitl is not None


def test_denied_proposal_changes_nothing():
    faulty_update = (
        f"DELETE DATA {{ <urn:mps:req:shallow2:out:depth> <{V}value> 2 . }}"
    )
    workflow, store = plant_workflow(
        ("router", "", [FinalAnswer({"intent": "planning_request"})], True),
        ("candidates", "", [FinalAnswer({"candidates": ["urn:mps:req:shallow2"]})], False),
        ("planner", "", [ToolCall("run_planner", {}),
                         FinalAnswer({"commentary": "no"})], True),
        ("mapper", "", [FinalAnswer({"mappings": [], "unmappable": [],
                                     "affected": []})], True),
        ("analyzer", "", [FinalAnswer({
            "reasoning": "", "conflicts": [{
                "description": "d", "origins": [],
                "capabilities": ["urn:mps:cap:drill"]}],
            "mutations": [
                {"update": faulty_update},
                {"update": f"INSERT DATA {{ <urn:mps:req:shallow2:out:depth> <{V}value> 5 . }}"},
            ],
            "rationale": "raise the depth", "resolvable": True})], False),
    )
    before = set(store.triples)
    state = workflow.start_session()
    workflow.step(state, "drill 2 mm")
    workflow.step(state, HitlDecision(state.pending_hitl.request_id, "approve"))
    assert state.pending_hitl.checkpoint == "approve_adaptation"
    workflow.step(state, HitlDecision(state.pending_hitl.request_id, "deny"))
    assert set(store.triples) == before
    assert store.change_log == []
    assert state.status == "awaiting_user"
    assert state.transcript[-1]["text"] == "Understood — nothing was changed."


def test_iteration_budget_exhaustion_marks_unresolvable():
    workflow, _ = plant_workflow(
        ("router", "", [FinalAnswer({"intent": "planning_request"})], True),
        ("candidates", "", [FinalAnswer({"candidates": ["urn:mps:req:deep12"]})], False),
        ("planner", "", [ToolCall("run_planner", {}),
                         FinalAnswer({"commentary": "no"})], True),
        max_iterations=0,
    )
    state = workflow.start_session()
    workflow.step(state, "drill 12 mm")
    workflow.step(state, HitlDecision(state.pending_hitl.request_id, "approve"))
    assert state.status == "unresolvable"


def test_empty_candidates_short_circuits():
    workflow, _ = plant_workflow(
        ("router", "", [FinalAnswer({"intent": "planning_request"})], True),
        ("candidates", "", [FinalAnswer({"candidates": []})], False),
    )
    state = workflow.start_session()
    workflow.step(state, "paint the workpiece purple")
    assert state.status == "awaiting_user"
    assert "No modeled goal" in state.transcript[-1]["text"]


def test_unknown_verdict_rejected():
    with pytest.raises(WorkflowError):
        HitlDecision("r", "maybe")


def test_event_log_is_replayable_json_lines():
    workflow, _ = plant_workflow(
        ("router", "", [FinalAnswer({"intent": "planning_request"})], True),
        ("candidates", "", [FinalAnswer({"candidates": ["urn:mps:req:drill7"]})], False),
        ("planner", "", [ToolCall("run_planner", {}),
                         FinalAnswer({"commentary": "ok"})], True),
    )
    state = workflow.start_session()
    workflow.step(state, "drill a hole")
    workflow.step(state, HitlDecision(state.pending_hitl.request_id, "approve"))
    import json as _json

    lines = state.export_events().splitlines()
    parsed = [_json.loads(line) for line in lines]
    assert [e["seq"] for e in parsed] == list(range(len(parsed)))
    assert parsed[0]["type"] == "user"
