"""Routed session workflow: fixed nodes, conditional edges, HitL gates.

Control flow lives entirely in this module — agents never pick their
successors. Three paths exist: knowledge questions are answered directly;
planning requests pass the goal-confirmation checkpoint before the solver
runs; failure reports pass the failure-update checkpoint before the store
changes. Infeasibility enters the bounded adaptation cycle, each iteration
of which pauses at the adaptation-approval checkpoint.

All identifiers and timestamps are logical (per-session counters), so a
scripted-provider run is a pure function of its inputs and transcripts are
byte-identical across repetitions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

from .agents import (
    AdaptationProposal,
    AgentError,
    AgentResult,
    GroundingError,
    analyze_and_propose,
    apply_repair,
    find_required_candidates,
    map_capabilities,
    plan_and_explain,
    retrieve_knowledge,
    route,
)
from .llm import ProviderError
from .model import Iri
from .planning import PlanningError
from .solver.client import SolverConfig
from .store import ApprovalToken, GraphStore


class WorkflowError(Exception):
    pass


class IllegalEventError(WorkflowError):
    """The event is not legal for the session's current status."""


class StaleDecisionError(WorkflowError):
    """The decision references no pending HitL request."""


@dataclass(frozen=True)
class WorkflowConfig:
    max_iterations: int = 5
    max_horizon: int = 5
    grids: Mapping[str, tuple] = field(default_factory=dict)
    solver_config: SolverConfig | None = None


@dataclass
class HitlRequest:
    request_id: str
    checkpoint: str  # confirm_goal | approve_adaptation | confirm_failure_update
    payload: dict


@dataclass(frozen=True)
class HitlDecision:
    request_id: str
    verdict: str  # approve | deny | modify
    actor: str = "user"
    payload: Mapping[str, Any] | None = None
    timestamp: int = 0

    def __post_init__(self) -> None:
        if self.verdict not in ("approve", "deny", "modify"):
            raise WorkflowError(f"unknown verdict: {self.verdict!r}")


Event = Union[str, HitlDecision]


@dataclass
class SessionState:
    session_id: str
    transcript: list[dict] = field(default_factory=list)
    intent: str | None = None
    candidates: list[str] = field(default_factory=list)
    confirmed_goal: str | None = None
    last_result: dict | None = None
    pending_proposal: AdaptationProposal | None = None
    pending_hitl: HitlRequest | None = None
    iteration: int = 0
    status: str = "awaiting_user"
    visited_nodes: list[str] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    decisions: list[HitlDecision] = field(default_factory=list)
    _hitl_seq: int = 0
    _snapshot: str | None = None

    def export_events(self) -> str:
        """Line-delimited event log; the substrate for end-to-end assertions."""
        return "".join(json.dumps(e, sort_keys=True, default=str) + "\n" for e in self.events)


class Workflow:
    """One workflow engine bound to a store, a provider, and a config."""

    def __init__(self, store: GraphStore, provider, config: WorkflowConfig | None = None):
        self.store = store
        self.provider = provider
        self.config = config or WorkflowConfig()
        self._session_seq = 0

    # --- session lifecycle -------------------------------------------------

    def start_session(self) -> SessionState:
        self._session_seq += 1
        return SessionState(session_id=f"s-{self._session_seq}")

    # --- event plumbing ----------------------------------------------------

    def _emit(self, state: SessionState, kind: str, **fields: Any) -> None:
        state.events.append({"seq": len(state.events), "type": kind, **fields})

    def _visit(self, state: SessionState, node: str) -> None:
        state.visited_nodes.append(node)

    def _say(self, state: SessionState, role: str, text: str) -> None:
        state.transcript.append({"role": role, "text": text})

    def _record_agent(self, state: SessionState, result: AgentResult) -> None:
        self._emit(
            state,
            "agent_result",
            agent=result.agent,
            payload=result.payload,
            tool_calls=[
                {"name": r.name, "arguments": dict(r.arguments)} for r in result.trace
            ],
        )

    def _pause_hitl(self, state: SessionState, checkpoint: str, payload: dict) -> None:
        state._hitl_seq += 1
        request = HitlRequest(f"{state.session_id}-h{state._hitl_seq}", checkpoint, payload)
        state.pending_hitl = request
        state.status = "awaiting_hitl"
        self._visit(state, f"hitl:{checkpoint}")
        self._emit(
            state, "hitl_request", request_id=request.request_id,
            checkpoint=checkpoint, payload=payload,
        )

    # --- public transitions ------------------------------------------------

    def step(self, state: SessionState, event: Event) -> SessionState:
        """Advance the session until the next pause point."""
        if isinstance(event, HitlDecision):
            return self.resolve_hitl(state, event)
        if state.status not in ("awaiting_user", "done", "unresolvable"):
            raise IllegalEventError(
                f"user message not accepted while status is {state.status}"
            )
        self._say(state, "user", event)
        self._emit(state, "user", text=event)
        try:
            self._handle_user_message(state, event)
        except (AgentError, ProviderError, PlanningError, GroundingError) as exc:
            self._say(state, "system", f"Something went wrong: {exc}")
            self._emit(state, "error", detail=str(exc))
            state.status = "awaiting_user"
        return state

    def resolve_hitl(self, state: SessionState, decision: HitlDecision) -> SessionState:
        if state.pending_hitl is None or decision.request_id != state.pending_hitl.request_id:
            raise StaleDecisionError(f"no pending request {decision.request_id!r}")
        request = state.pending_hitl
        state.pending_hitl = None
        stamped = HitlDecision(
            decision.request_id, decision.verdict, decision.actor,
            decision.payload, timestamp=len(state.events),
        )
        state.decisions.append(stamped)
        self._emit(
            state, "hitl_decision", request_id=stamped.request_id,
            verdict=stamped.verdict, actor=stamped.actor,
            payload=dict(stamped.payload) if stamped.payload else None,
        )
        try:
            self._continue_after_hitl(state, request, stamped)
        except (AgentError, ProviderError, PlanningError, GroundingError) as exc:
            self._say(state, "system", f"Something went wrong: {exc}")
            self._emit(state, "error", detail=str(exc))
            state.status = "awaiting_user"
        return state

    # --- the three paths ---------------------------------------------------

    def _handle_user_message(self, state: SessionState, message: str) -> None:
        state.status = "running"
        self._visit(state, "router")
        intent, result = route(self.provider, message)
        state.intent = intent
        self._record_agent(state, result)
        if intent == "knowledge_query":
            self._visit(state, "knowledge")
            answer = retrieve_knowledge(self.store, self.provider, message)
            self._record_agent(state, answer)
            self._say(state, "system", answer.payload["answer"])
            state.status = "awaiting_user"
            return
        if intent == "planning_request":
            self._visit(state, "candidates")
            found = find_required_candidates(self.store, self.provider, message)
            self._record_agent(state, found)
            state.candidates = list(found.payload["candidates"])
            if not state.candidates:
                self._say(
                    state, "system",
                    "No modeled goal matches this request; nothing to plan.",
                )
                state.status = "awaiting_user"
                return
            self._pause_hitl(state, "confirm_goal", {"candidates": state.candidates})
            return
        # runtime_failure_report
        self._visit(state, "mapper")
        mapping = map_capabilities(self.store, self.provider, failure_report=message)
        self._record_agent(state, mapping)
        self._visit(state, "analyzer")
        proposal, analysis = analyze_and_propose(
            self.store, self.provider,
            {"failure_report": message, "mapping": mapping.payload},
        )
        self._record_agent(state, analysis)
        state.pending_proposal = proposal
        self._pause_hitl(
            state, "confirm_failure_update", self._proposal_payload(proposal)
        )

    def _continue_after_hitl(
        self, state: SessionState, request: HitlRequest, decision: HitlDecision
    ) -> None:
        if decision.verdict == "deny":
            state.pending_proposal = None
            self._say(state, "system", "Understood — nothing was changed.")
            state.status = "awaiting_user"
            return
        state.status = "running"
        if request.checkpoint == "confirm_goal":
            goal = state.candidates[0]
            if decision.verdict == "modify" and decision.payload:
                goal = decision.payload.get("goal", goal)
            state.confirmed_goal = goal
            self._plan(state)
            return
        # approve_adaptation / confirm_failure_update
        assert state.pending_proposal is not None
        proposal = state.pending_proposal
        state.pending_proposal = None
        token = ApprovalToken(decision.request_id, decision.verdict)
        state._snapshot = self.store.snapshot()
        self._visit(state, "repair")
        applied = apply_repair(self.store, proposal, token)
        self._record_agent(state, applied)
        self._emit(state, "change_record", record=applied.payload["change_record"])
        if state.confirmed_goal is None:
            self._say(state, "system", "The capability model was updated.")
            state.status = "awaiting_user"
            return
        try:
            self._plan(state)
        except (AgentError, PlanningError):
            self.store.rollback(state._snapshot)
            self._emit(state, "rollback", snapshot=state._snapshot)
            raise

    # --- planning and the adaptation cycle --------------------------------

    def _plan(self, state: SessionState) -> None:
        self._visit(state, "planner")
        result = plan_and_explain(
            self.store,
            self.provider,
            Iri(state.confirmed_goal),
            max_horizon=self.config.max_horizon,
            grids=self.config.grids,
            solver_config=self.config.solver_config,
        )
        self._record_agent(state, result)
        state.last_result = result.payload["result"]
        self._say(state, "system", result.payload["explanation"])
        if state.last_result["verdict"] == "sat":
            state.status = "done"
            self._emit(state, "status", status="done")
            return
        self._advance_adaptation(state)

    def _advance_adaptation(self, state: SessionState) -> None:
        """One analyze-and-propose turn of the cycle, ending at the HitL gate."""
        if state.iteration >= self.config.max_iterations:
            self._say(
                state, "system",
                f"No resolution found within {self.config.max_iterations} "
                "adaptation iterations; the request appears unresolvable.",
            )
            state.status = "unresolvable"
            self._emit(state, "status", status="unresolvable")
            return
        state.iteration += 1
        diagnosis = state.last_result["diagnosis"]
        self._visit(state, "mapper")
        mapping = map_capabilities(
            self.store, self.provider, origins=diagnosis["origins"]
        )
        self._record_agent(state, mapping)
        self._visit(state, "analyzer")
        proposal, analysis = analyze_and_propose(
            self.store, self.provider,
            {
                "diagnosis": diagnosis,
                "conflict_pairs": state.last_result["conflict_pairs"],
                "mapping": mapping.payload,
            },
        )
        self._record_agent(state, analysis)
        if not proposal.resolvable:
            self._say(
                state, "system",
                f"This conflict cannot be repaired: {proposal.rationale}",
            )
            state.status = "unresolvable"
            self._emit(state, "status", status="unresolvable")
            return
        state.pending_proposal = proposal
        self._pause_hitl(state, "approve_adaptation", self._proposal_payload(proposal))

    def _proposal_payload(self, proposal: AdaptationProposal) -> dict:
        from .store import serialize_query, triple_to_json

        return {
            "conflicts": [
                {
                    "description": c.description,
                    "origins": list(c.origins),
                    "capabilities": list(c.capabilities),
                }
                for c in proposal.conflicts
            ],
            "mutations": [serialize_query(q) for q in proposal.mutations],
            "diff": {
                "inserted": [
                    triple_to_json(t)
                    for q in proposal.mutations if q.kind == "insert"
                    for t in q.triples
                ],
                "deleted": [
                    triple_to_json(t)
                    for q in proposal.mutations if q.kind == "delete"
                    for t in q.triples
                ],
            },
            "rationale": proposal.rationale,
            "targets_provided": proposal.targets_provided,
        }
