"""HTTP facade: session lifecycle, decision gating, and status codes."""

import pytest
from fastapi.testclient import TestClient

from capaplan.llm import ScriptedProvider, load_script
from capaplan.model import parse_model
from capaplan.service import create_app
from capaplan.store import GraphStore
from capaplan.workflow import WorkflowConfig

from conftest import FIXTURES, SCRIPTS


@pytest.fixture
def client():
    store = GraphStore.load(
        parse_model((FIXTURES / "depth_station.json").read_text(encoding="utf-8"))
    )
    provider = ScriptedProvider(
        load_script((SCRIPTS / "ap_two_iteration.json").read_text(encoding="utf-8"))
    )
    app = create_app(store, provider, WorkflowConfig(max_horizon=2))
    return TestClient(app)


def start(client):
    response = client.post("/sessions")
    assert response.status_code == 201
    return response.json()["session_id"]


def test_session_lifecycle_to_plan(client):
    sid = start(client)
    body = client.post(
        f"/sessions/{sid}/messages",
        json={"text": "Drill a 2 mm hole in the workpiece at station 15."},
    ).json()
    assert body["status"] == "awaiting_hitl"
    assert body["pending_hitl"]["checkpoint"] == "confirm_goal"
    while body["pending_hitl"] is not None:
        body = client.post(
            f"/sessions/{sid}/decisions",
            json={"request_id": body["pending_hitl"]["request_id"],
                  "verdict": "approve"},
        ).json()
    assert body["status"] == "done"
    assert body["last_result"]["verdict"] == "sat"


def test_adaptation_payload_exposes_diff(client):
    sid = start(client)
    body = client.post(
        f"/sessions/{sid}/messages",
        json={"text": "Drill a 2 mm hole in the workpiece at station 15."},
    ).json()
    body = client.post(
        f"/sessions/{sid}/decisions",
        json={"request_id": body["pending_hitl"]["request_id"], "verdict": "approve"},
    ).json()
    payload = body["pending_hitl"]["payload"]
    deleted = payload["diff"]["deleted"]
    inserted = payload["diff"]["inserted"]
    assert any(t["o"]["lit"] == 2 for t in deleted)
    assert any(t["o"]["lit"] == 5 for t in inserted)


def test_stale_decision_is_conflict(client):
    sid = start(client)
    client.post(
        f"/sessions/{sid}/messages",
        json={"text": "Drill a 2 mm hole in the workpiece at station 15."},
    )
    response = client.post(
        f"/sessions/{sid}/decisions",
        json={"request_id": f"{sid}-h999", "verdict": "approve"},
    )
    assert response.status_code == 409


def test_unknown_session_is_404(client):
    assert client.get("/sessions/s-999").status_code == 404
    assert client.post("/sessions/s-999/messages", json={"text": "hi"}).status_code == 404


def test_bad_verdict_is_unprocessable(client):
    sid = start(client)
    body = client.post(
        f"/sessions/{sid}/messages",
        json={"text": "Drill a 2 mm hole in the workpiece at station 15."},
    ).json()
    response = client.post(
        f"/sessions/{sid}/decisions",
        json={"request_id": body["pending_hitl"]["request_id"], "verdict": "maybe"},
    )
    assert response.status_code == 422


def test_model_and_changelog_views(client):
    sid = start(client)
    body = client.post(
        f"/sessions/{sid}/messages",
        json={"text": "Drill a 2 mm hole in the workpiece at station 15."},
    ).json()
    while body["pending_hitl"] is not None:
        body = client.post(
            f"/sessions/{sid}/decisions",
            json={"request_id": body["pending_hitl"]["request_id"],
                  "verdict": "approve"},
        ).json()
    model = client.get("/model").json()
    assert {c["iri"] for c in model["capabilities"]} == {
        "urn:fix:cap:drill", "urn:fix:req:hole",
    }
    changelog = client.get("/changelog").json()
    assert len(changelog) == 2  # one record per repair iteration
    events = client.get(f"/sessions/{sid}/events").text
    assert events.count('"type": "change_record"') == 2


def test_events_endpoint_returns_json_lines(client):
    sid = start(client)
    client.post(f"/sessions/{sid}/messages", json={"text": "Drill a 2 mm hole in the workpiece at station 15."})
    text = client.get(f"/sessions/{sid}/events").text
    assert text.splitlines()[0].startswith('{"')
