"""Scenario harness: loading, grading scales, and repetition agreement."""

import json

import pytest

from capaplan.scenarios import (
    CaseReport,
    RepetitionResult,
    ScenarioError,
    ScenarioSpec,
    load_scenario,
    run_scenario,
)

from conftest import SCENARIOS


def test_load_scenario_resolves_relative_paths():
    spec = load_scenario(SCENARIOS / "kq_01.json")
    assert spec.category == "KQ"
    assert spec.fixture.endswith("fixtures/mps500.json")
    assert spec.script.endswith("scripts/kq.json")


def test_unknown_category_rejected():
    with pytest.raises(ScenarioError):
        ScenarioSpec("X", "BOGUS", "f", "s", ({"user": "hi"},), {"facts": ["a"]})


def test_empty_expectations_rejected():
    with pytest.raises(ScenarioError):
        ScenarioSpec("X", "KQ", "f", "s", ({"user": "hi"},), {})


def test_knowledge_scenario_grades_fully():
    case = run_scenario(load_scenario(SCENARIOS / "kq_01.json"))
    assert case.verdict == "fully"
    assert case.passed


def test_missing_fact_downgrades_to_partial(tmp_path):
    doc = json.loads((SCENARIOS / "kq_01.json").read_text(encoding="utf-8"))
    doc["fixture"] = str((SCENARIOS / doc["fixture"]).resolve())
    doc["script"] = str((SCENARIOS / doc["script"]).resolve())
    doc["expectations"]["facts"].append("this fact is never said")
    path = tmp_path / "kq_modified.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    case = run_scenario(load_scenario(path))
    assert case.verdict == "partially"
    assert not case.passed


def test_repetition_disagreement_fails_the_case():
    reps = (
        RepetitionResult("fully", "ok", "log-a\n"),
        RepetitionResult("fully", "ok", "log-b\n"),
    )
    case = CaseReport("X", "SAT", reps)
    assert not case.agree
    assert case.verdict == "not"


def test_adaptation_scenario_is_binary():
    case = run_scenario(load_scenario(SCENARIOS / "ap_05.json"), repetitions=2)
    assert case.verdict == "pass"
    assert {r.verdict for r in case.repetitions} == {"pass"}


def test_sat_scenario_checks_step_sequence():
    case = run_scenario(load_scenario(SCENARIOS / "sat_01.json"), repetitions=2)
    assert case.verdict == "fully"
    assert case.agree  # byte-identical event logs across repetitions
