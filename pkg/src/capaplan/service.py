"""HTTP facade over the session workflow.

The API is deliberately thin: every behavior lives in the workflow engine,
and each session is guarded by a lock so concurrent requests serialize.
Human-in-the-loop decisions referencing an outdated request are rejected
with 409 so a stale client never mutates the model.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .llm import ScriptedProvider, load_script
from .model import parse_model, serialize_model
from .store import GraphStore, triple_to_json
from .workflow import (
    HitlDecision,
    IllegalEventError,
    SessionState,
    StaleDecisionError,
    Workflow,
    WorkflowConfig,
    WorkflowError,
)


class MessageIn(BaseModel):
    text: str


class DecisionIn(BaseModel):
    request_id: str
    verdict: str
    actor: str = "user"
    payload: dict[str, Any] | None = None


@dataclass
class _Session:
    state: SessionState
    lock: threading.Lock = field(default_factory=threading.Lock)


def _session_view(state: SessionState) -> dict:
    pending = None
    if state.pending_hitl is not None:
        pending = {
            "request_id": state.pending_hitl.request_id,
            "checkpoint": state.pending_hitl.checkpoint,
            "payload": state.pending_hitl.payload,
        }
    return {
        "session_id": state.session_id,
        "status": state.status,
        "intent": state.intent,
        "transcript": state.transcript,
        "candidates": state.candidates,
        "confirmed_goal": state.confirmed_goal,
        "last_result": state.last_result,
        "pending_hitl": pending,
        "iteration": state.iteration,
        "visited_nodes": state.visited_nodes,
    }


def create_app(
    store: GraphStore,
    provider,
    config: WorkflowConfig | None = None,
) -> FastAPI:
    """Build the application around one store/provider/workflow triple."""
    app = FastAPI(title="capaplan", version="1.0")
    workflow = Workflow(store, provider, config)
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> _Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session() -> dict:
        with registry_lock:
            state = workflow.start_session()
            sessions[state.session_id] = _Session(state)
        return _session_view(state)

    @app.get("/sessions/{session_id}")
    def read_session(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            return _session_view(session.state)

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, message: MessageIn) -> dict:
        session = get_session(session_id)
        with session.lock:
            try:
                workflow.step(session.state, message.text)
            except IllegalEventError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            return _session_view(session.state)

    @app.post("/sessions/{session_id}/decisions")
    def post_decision(session_id: str, decision: DecisionIn) -> dict:
        session = get_session(session_id)
        with session.lock:
            try:
                parsed = HitlDecision(
                    decision.request_id,
                    decision.verdict,
                    decision.actor,
                    decision.payload,
                )
                workflow.step(session.state, parsed)
            except StaleDecisionError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except WorkflowError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            return _session_view(session.state)

    @app.get("/sessions/{session_id}/pending")
    def read_pending(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            state = session.state
            if state.pending_hitl is None:
                return {"pending": None}
            return {
                "pending": {
                    "request_id": state.pending_hitl.request_id,
                    "checkpoint": state.pending_hitl.checkpoint,
                    "payload": state.pending_hitl.payload,
                }
            }

    @app.get("/sessions/{session_id}/events", response_class=PlainTextResponse)
    def read_events(session_id: str) -> str:
        session = get_session(session_id)
        with session.lock:
            return session.state.export_events()

    @app.get("/model")
    def read_model() -> dict:
        return json.loads(serialize_model(store.materialize(), "json"))

    @app.get("/model/triples")
    def read_triples() -> list[dict]:
        return [triple_to_json(t) for t in store.triples]

    @app.get("/changelog")
    def read_changelog() -> list[dict]:
        return [record.to_json() for record in store.change_log]

    return app


def app_from_config(config_path: str) -> FastAPI:
    """Assemble the application from a JSON config file."""
    from pathlib import Path

    doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
    store = GraphStore.load(
        parse_model(Path(doc["model"]).read_text(encoding="utf-8"))
    )
    provider_cfg = doc.get("provider", {})
    kind = provider_cfg.get("kind", "scripted")
    if kind == "scripted":
        provider = ScriptedProvider(
            load_script(Path(provider_cfg["script"]).read_text(encoding="utf-8"))
        )
    elif kind == "http":
        from .llm import HttpProvider

        provider = HttpProvider(
            base_url=provider_cfg["base_url"], model=provider_cfg["model"]
        )
    else:
        raise ValueError(f"unknown provider kind: {kind}")
    workflow_config = WorkflowConfig(
        max_iterations=doc.get("max_iterations", 5),
        max_horizon=doc.get("max_horizon", 5),
    )
    return create_app(store, provider, workflow_config)
