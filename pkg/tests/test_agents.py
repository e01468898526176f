"""Agent behaviors: grounding checks, repair guards, and tool loops."""

import json

import pytest

from capaplan.agents import (
    AgentError,
    GroundingError,
    analyze_and_propose,
    apply_repair,
    expand_remove_capability,
    find_required_candidates,
    intent_violations,
    map_capabilities,
    plan_and_explain,
    retrieve_knowledge,
    route,
    simulate_mutations,
)
from capaplan.llm import FinalAnswer, ScriptEntry, ScriptedProvider, ToolCall
from capaplan.model import Iri, parse_model, serialize_model
from capaplan.store import ApprovalToken, parse_query

V = "urn:cap:v1#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


def provider_of(*entries):
    return ScriptedProvider([ScriptEntry(a, m, tuple(r), rep) for a, m, r, rep in entries])


def test_route_classifies_intents():
    provider = provider_of(
        ("router", "", [FinalAnswer({"intent": "knowledge_query"})], False),
        ("router", "", [FinalAnswer({"intent": "runtime_failure_report"})], False),
    )
    intent, result = route(provider, "what can the plant do?")
    assert intent == "knowledge_query"
    assert result.trace == ()
    intent, _ = route(provider, "the conveyor broke")
    assert intent == "runtime_failure_report"


def test_knowledge_answer_must_be_grounded(plant_store):
    query = f'SELECT ?d WHERE {{ <urn:mps:cap:drill> <{V}description> ?d . }}'
    good_row = ["Drills a hole with depth 5 mm to 10 mm at station 3"]
    provider = provider_of(
        ("knowledge", "", [
            ToolCall("select", {"query": query}),
            FinalAnswer({"answer": "5 to 10 mm", "supporting_rows": [
                {"query": query, "row": good_row}]}),
        ], False),
    )
    result = retrieve_knowledge(plant_store, provider, "depth range?")
    assert "5 to 10" in result.payload["answer"]
    assert [r.name for r in result.trace] == ["select"]


def test_fabricated_supporting_row_rejected(plant_store):
    query = f'SELECT ?d WHERE {{ <urn:mps:cap:drill> <{V}description> ?d . }}'
    provider = provider_of(
        ("knowledge", "", [
            FinalAnswer({"answer": "up to 99 mm", "supporting_rows": [
                {"query": query, "row": ["Drills to 99 mm"]}]}),
        ], False),
    )
    with pytest.raises(GroundingError):
        retrieve_knowledge(plant_store, provider, "depth range?")


def test_candidates_must_exist_in_store(plant_store):
    provider = provider_of(
        ("candidates", "", [FinalAnswer({"candidates": ["urn:mps:req:nonexistent"]})], False),
    )
    with pytest.raises(GroundingError):
        find_required_candidates(plant_store, provider, "do something")


def test_mapper_affected_must_be_known(plant_store):
    provider = provider_of(
        ("mapper", "", [FinalAnswer({
            "mappings": [], "unmappable": [], "affected": ["urn:mps:cap:ghost"]})], False),
    )
    with pytest.raises(GroundingError):
        map_capabilities(plant_store, provider, failure_report="the ghost broke")


def test_planner_payload_contains_result_and_explanation(plant_store):
    provider = provider_of(
        ("planner", "", [ToolCall("run_planner", {}),
                         FinalAnswer({"commentary": "ok"})], True),
    )
    result = plan_and_explain(
        plant_store, provider, Iri("urn:mps:req:drill7"), max_horizon=3
    )
    assert result.payload["result"]["verdict"] == "sat"
    assert "urn:mps:cap:drill" in result.payload["explanation"]
    assert result.payload["commentary"] == "ok"


def test_intent_violation_detects_target_collapsed_to_source(plant_model):
    doc = json.loads(serialize_model(plant_model, "json"))
    for cap in doc["capabilities"]:
        if cap["iri"] == "urn:mps:req:move39":
            cap["outputs"][0]["value"] = 3
    after = parse_model(json.dumps(doc))
    violations = intent_violations(plant_model, after)
    assert violations and "move39" in violations[0]


def test_intent_violation_accepts_distinct_target(plant_model):
    doc = json.loads(serialize_model(plant_model, "json"))
    for cap in doc["capabilities"]:
        if cap["iri"] == "urn:mps:req:move39":
            cap["outputs"][0]["value"] = 7
    after = parse_model(json.dumps(doc))
    assert intent_violations(plant_model, after) == []


def test_remove_capability_macro_expands_to_its_triples(plant_store):
    q = expand_remove_capability(plant_store, "urn:mps:cap:conveyor")
    assert q.kind == "delete"
    subjects = {t.subject for t in q.triples}
    assert "urn:mps:cap:conveyor" in subjects
    # property nodes of the capability go too
    assert any(s.startswith("urn:mps:cap:conveyor:") for s in subjects)


def test_simulate_mutations_rejects_model_breaking_update(plant_store):
    # deleting a datatype triple leaves a malformed property behind
    broken = parse_query(
        f"DELETE DATA {{ <urn:mps:cap:drill:out:depth> <{V}datatype> \"real\" . }}"
    )
    with pytest.raises(AgentError):
        simulate_mutations(plant_store, [broken])


def test_analyzer_retry_consumes_second_response(plant_store):
    faulty = {
        "reasoning": "collapse target onto source",
        "conflicts": [{"description": "unreachable", "origins": [],
                       "capabilities": ["urn:mps:req:move39"]}],
        "mutations": [
            {"update": f"DELETE DATA {{ <urn:mps:req:move39:out:station> <{V}value> 9 . }}"},
            {"update": f"INSERT DATA {{ <urn:mps:req:move39:out:station> <{V}value> 3 . }}"},
        ],
        "rationale": "set target to 3",
        "resolvable": True,
    }
    good = json.loads(json.dumps(faulty))
    good["mutations"][1]["update"] = (
        f"INSERT DATA {{ <urn:mps:req:move39:out:station> <{V}value> 7 . }}"
    )
    good["rationale"] = "set target to 7"
    provider = provider_of(
        ("analyzer", "", [FinalAnswer(faulty), FinalAnswer(good)], False),
    )
    proposal, _ = analyze_and_propose(plant_store, provider, {"diagnosis": {}})
    assert proposal.resolvable
    assert "7" in proposal.rationale


def test_apply_repair_records_change(plant_store):
    update = {
        "reasoning": "",
        "conflicts": [{"description": "d", "origins": [],
                       "capabilities": ["urn:mps:req:move39"]}],
        "mutations": [
            {"update": f"DELETE DATA {{ <urn:mps:req:move39:out:station> <{V}value> 9 . }}"},
            {"update": f"INSERT DATA {{ <urn:mps:req:move39:out:station> <{V}value> 7 . }}"},
        ],
        "rationale": "r",
        "resolvable": True,
    }
    provider = provider_of(("analyzer", "", [FinalAnswer(update)], False))
    proposal, _ = analyze_and_propose(plant_store, provider, {"diagnosis": {}})
    before = len(plant_store.change_log)
    result = apply_repair(plant_store, proposal, ApprovalToken("d-1", "approve"))
    assert len(plant_store.change_log) == before + 1
    assert result.payload["replan"] is True
    station = plant_store.materialize().capability(
        Iri("urn:mps:req:move39")
    ).property_by_iri(Iri("urn:mps:req:move39:out:station"))
    assert station.value == 7
