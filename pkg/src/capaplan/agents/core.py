"""The six workflow agents.

Router, knowledge retrieval, goal-candidate matching, capability mapping,
planning with explanation, adaptation analysis, and repair application.
Every numeric value in an explanation or proposal is copied from the model
or the planning result; language models only contribute classification,
ranking, and connective text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from ..llm import ToolDecl
from ..model import (
    CapabilityModel,
    Iri,
    IriTerm,
    ModelError,
    format_literal,
    triples_to_model,
)
from ..model.projection import P_HAS_CONSTRAINT, P_HAS_INPUT, P_HAS_OUTPUT
from ..planning import (
    PlanningError,
    PlanningProblem,
    SatResult,
    UnsatResult,
    conflict_pairs,
    encode,
    solve,
)
from ..planning.encode import EncodingIndex
from ..planning.report import result_to_json
from ..planning.solve import ConflictPair
from ..solver.client import SolverConfig
from ..store import ApprovalToken, GraphStore, QueryForm, parse_query, serialize_query
from .base import (
    QUERY_TOOLS,
    AgentError,
    AgentResult,
    GroundingError,
    ToolCallRecord,
    make_query_tools,
    run_agent,
)

INTENTS = ("knowledge_query", "planning_request", "runtime_failure_report")


# --- router ----------------------------------------------------------------


def route(provider, message: str) -> tuple[str, AgentResult]:
    """Classify a user message into one of the three intents. No tools."""
    if not message.strip():
        raise AgentError("cannot route an empty message")
    result = run_agent("router", provider, (("user", message),), {}, ())
    intent = result.payload["intent"]
    assert not result.trace, "router must not call tools"
    return intent, result


# --- knowledge retrieval ---------------------------------------------------


def retrieve_knowledge(store: GraphStore, provider, question: str) -> AgentResult:
    """Answer a question from the graph; every claim carries a source row."""
    tools = make_query_tools(store)
    result = run_agent(
        "knowledge", provider, (("user", question),), tools, QUERY_TOOLS
    )
    executed: dict[str, Any] = {}
    for record in result.trace:
        executed[record.arguments.get("query", "")] = record.result
    for support in result.payload["supporting_rows"]:
        rows = executed.get(support["query"])
        if rows is None:
            raise GroundingError(
                f"supporting row cites a query that was never executed: {support['query']!r}"
            )
        if isinstance(rows, list) and support["row"] not in rows:
            raise GroundingError(
                f"supporting row not present in the query result: {support['row']!r}"
            )
    return result


# --- goal candidates -------------------------------------------------------


def find_required_candidates(store: GraphStore, provider, request: str) -> AgentResult:
    """Rank required-capability IRIs matching a production request."""
    tools = make_query_tools(store)
    result = run_agent(
        "candidates", provider, (("user", request),), tools, QUERY_TOOLS
    )
    known = {c.iri.value for c in store.materialize().required()}
    for iri in result.payload["candidates"]:
        if iri not in known:
            raise GroundingError(f"candidate {iri!r} is not a required capability in the store")
    return result


# --- capability mapper -----------------------------------------------------


def map_capabilities(
    store: GraphStore,
    provider,
    *,
    origins: Sequence[Mapping[str, Any]] = (),
    failure_report: str = "",
) -> AgentResult:
    """Connect core origins or a failure report to stored capabilities."""
    if not origins and not failure_report:
        raise AgentError("mapper needs core origins or a failure report")
    if failure_report:
        message = failure_report
    else:
        message = "Map these solver core origins to capabilities: " + json.dumps(
            list(origins), sort_keys=True
        )
    tools = make_query_tools(store)
    result = run_agent("mapper", provider, (("user", message),), tools, QUERY_TOOLS)
    known = {c.iri.value for c in store.materialize().capabilities}
    for mapping in result.payload["mappings"]:
        if mapping["capability"] not in known:
            raise GroundingError(f"mapped capability {mapping['capability']!r} not in store")
    for iri in result.payload["affected"]:
        if iri not in known:
            raise GroundingError(f"affected capability {iri!r} not in store")
    return result


# --- planner ---------------------------------------------------------------


def plan_and_explain(
    store: GraphStore,
    provider,
    goal: Iri,
    *,
    max_horizon: int = 5,
    grids: Mapping[str, tuple] | None = None,
    solver_config: SolverConfig | None = None,
) -> AgentResult:
    """Run the solver and assemble a faithful natural-language explanation."""
    domain = store.materialize()
    problem = PlanningProblem(goal, domain, max_horizon, grids or {})
    holder: dict[str, Any] = {}

    def run_planner(args: Mapping[str, Any]) -> Any:
        try:
            outcome = solve(problem, solver_config)
        except PlanningError as exc:
            holder["error"] = exc
            raise
        pairs: tuple[ConflictPair, ...] = ()
        index = None
        if isinstance(outcome, UnsatResult):
            _, index = encode(problem, outcome.diagnosis.horizon_tried)
            pairs = conflict_pairs(outcome.diagnosis, index)
        holder.update(result=outcome, pairs=pairs, index=index)
        return result_to_json(outcome, pairs)

    decl = (
        ToolDecl(
            "run_planner",
            "Run the formal planner on the confirmed goal.",
            {"type": "object", "properties": {}},
        ),
    )
    result = run_agent(
        "planner",
        provider,
        (("user", f"Plan for the confirmed goal {goal.value}."),),
        {"run_planner": run_planner},
        decl,
    )
    if "error" in holder:
        raise AgentError(
            f"planning failed: {holder['error']}; check the solver configuration "
            "(CAPAPLAN_SOLVER_PATH) and the time budget"
        )
    if "result" not in holder:
        raise AgentError("planner finished without invoking the solver")
    outcome = holder["result"]
    if isinstance(outcome, SatResult):
        explanation = _sat_explanation(outcome.plan, domain)
    else:
        explanation = _unsat_explanation(
            outcome.diagnosis.horizon_tried, holder["pairs"], holder["index"], problem
        )
    payload = {
        "commentary": result.payload["commentary"],
        "result": result_to_json(outcome, holder["pairs"]),
        "explanation": explanation,
    }
    return AgentResult("planner", payload, result.trace)


def _sat_explanation(plan, domain: CapabilityModel) -> str:
    if plan.goal_already_satisfied:
        return "The goal is already satisfied in the initial state; no steps are required."
    lines = [f"The goal is achievable in {len(plan.steps)} step(s)."]
    for step in plan.steps:
        cap = domain.capability(step.capability)
        values = step.assignment_map()
        parts = [
            f"{p.name}={format_literal(values[p.iri])}"
            for p in cap.properties
            if p.iri in values
        ]
        detail = f" with {', '.join(parts)}" if parts else ""
        lines.append(f"Step {step.index + 1}: {cap.description} ({cap.iri.value}){detail}.")
    return "\n".join(lines)


def _unsat_explanation(
    horizon: int,
    pairs: tuple[ConflictPair, ...],
    index: EncodingIndex,
    problem: PlanningProblem,
) -> str:
    domain = problem.domain
    goal_cap = domain.capability(problem.goal)
    lines = [
        f"No feasible plan exists within {horizon} step(s); "
        f"{len(pairs)} conflict(s) were identified."
    ]
    for i, pair in enumerate(pairs, start=1):
        info = index.goal_ordinals[pair.goal_ordinal]
        if info.kind == "output-binding" and info.property_iri is not None:
            decl = goal_cap.property_by_iri(info.property_iri)
            demand = f"required {decl.name} = {format_literal(decl.value)}"
        else:
            demand = f"the goal constraint on {', '.join(pair.shared_properties)}"
        cap = domain.capability(pair.capability)
        details = []
        for ordinal in pair.capability_ordinals:
            cap_info = index.cap_ordinals[pair.capability.value][ordinal]
            if cap_info.kind in ("output-binding", "input-binding") and cap_info.property_iri:
                decl = cap.property_by_iri(cap_info.property_iri)
                details.append(f"fixed {decl.name} = {format_literal(decl.value)}")
            else:
                details.append(f"constraint on {', '.join(cap_info.referenced_names)}")
        lines.append(
            f"Conflict {i}: {demand} cannot be met by '{cap.description}' "
            f"({cap.iri.value}; {'; '.join(sorted(set(details)))})."
        )
    return "\n".join(lines)


# --- analyzer --------------------------------------------------------------


@dataclass(frozen=True)
class ConflictNote:
    description: str
    origins: tuple[str, ...]
    capabilities: tuple[str, ...]


@dataclass(frozen=True)
class AdaptationProposal:
    conflicts: tuple[ConflictNote, ...]
    mutations: tuple[QueryForm, ...]
    rationale: str
    resolvable: bool
    targets_provided: bool = False

    def __post_init__(self) -> None:
        if self.resolvable and not self.mutations:
            raise ValueError("a resolvable proposal must carry mutations")


class ProposalRejected(AgentError):
    """A generated proposal failed a deterministic post-check."""


def _capability_node_sets(store: GraphStore) -> dict[str, set[str]]:
    """Capability IRI -> the IRIs of all nodes belonging to it."""
    out: dict[str, set[str]] = {}
    members = (P_HAS_INPUT, P_HAS_OUTPUT, P_HAS_CONSTRAINT)
    for t in store.triples:
        if t.predicate in members:
            out.setdefault(t.subject, {t.subject}).add(str(t.object))
    for c in store.materialize().capabilities:
        out.setdefault(c.iri.value, {c.iri.value})
    return out


def expand_remove_capability(store: GraphStore, iri: str) -> QueryForm:
    """Deterministic macro: delete every triple a capability owns or is in."""
    related = _capability_node_sets(store).get(iri, {iri})
    doomed = tuple(
        t
        for t in store.triples
        if t.subject in related
        or (isinstance(t.object, IriTerm) and str(t.object) in related)
    )
    if not doomed:
        raise ProposalRejected(f"capability {iri!r} has no triples to remove")
    return QueryForm("delete", triples=doomed)


def simulate_mutations(store: GraphStore, mutations: Sequence[QueryForm]) -> CapabilityModel:
    """The model the store would hold after applying the mutations."""
    triples = set(store.triples)
    for q in mutations:
        if q.kind == "insert":
            triples |= set(q.triples)
        elif q.kind == "delete":
            triples -= set(q.triples)
        else:
            raise ProposalRejected(f"not an update form: {q.kind}")
    try:
        return triples_to_model(
            sorted(triples, key=lambda t: (t.subject, t.predicate, str(t.object)))
        )
    except Exception as exc:
        raise ProposalRejected(f"mutations leave an invalid model: {exc}") from exc


def _goal_const_pairs(m: CapabilityModel) -> dict[tuple[str, str], tuple]:
    """(required-cap IRI, product property name) -> (input const, output const)."""
    out: dict[tuple[str, str], tuple] = {}
    for cap in m.required():
        for name in {p.name for p in cap.properties if p.subject == "product"}:
            ins = [p.value for p in cap.inputs if p.subject == "product" and p.name == name]
            outs = [p.value for p in cap.outputs if p.subject == "product" and p.name == name]
            out[(cap.iri.value, name)] = (
                ins[0] if ins else None,
                outs[0] if outs else None,
            )
    return out


def intent_violations(before: CapabilityModel, after: CapabilityModel) -> list[str]:
    """Goal mutations that collapse a target onto its source lose the user's intent."""
    previous = _goal_const_pairs(before)
    violations = []
    for key, (source, target) in _goal_const_pairs(after).items():
        if source is None or target is None or source != target:
            continue
        was = previous.get(key)
        if was is None or was[0] != was[1]:
            cap, name = key
            violations.append(
                f"{cap}: proposed {name} target equals the source value "
                f"{format_literal(source)}, losing the user's stated intent"
            )
    return violations


def _materialize_proposal(
    store: GraphStore, payload: Mapping[str, Any]
) -> AdaptationProposal:
    known = {c.iri.value for c in store.materialize().capabilities}
    conflicts = []
    for entry in payload["conflicts"]:
        for iri in entry["capabilities"]:
            if iri not in known:
                raise GroundingError(f"conflict references unknown capability {iri!r}")
        conflicts.append(
            ConflictNote(
                entry["description"], tuple(entry["origins"]), tuple(entry["capabilities"])
            )
        )
    node_sets = _capability_node_sets(store)
    provided_nodes: set[str] = set()
    for c in store.materialize().provided():
        provided_nodes |= node_sets.get(c.iri.value, set())
    mutations: list[QueryForm] = []
    targets_provided = False
    for record in payload["mutations"]:
        flagged = bool(record.get("targets_provided"))
        if "remove_capability" in record:
            form = expand_remove_capability(store, record["remove_capability"])
        elif "update" in record:
            form = parse_query(record["update"])
            if form.kind not in ("insert", "delete"):
                raise ProposalRejected(f"mutation must be an update form: {record['update']!r}")
        else:
            raise ProposalRejected(f"unrecognized mutation record: {record!r}")
        touches_provided = any(
            t.subject in provided_nodes
            or (isinstance(t.object, IriTerm) and str(t.object) in provided_nodes)
            for t in form.triples
        )
        if touches_provided and not flagged:
            raise ProposalRejected(
                "mutation touches a provided capability without the explicit "
                "targets_provided flag; plant-side changes need deliberate consent"
            )
        targets_provided = targets_provided or touches_provided
        mutations.append(form)
    proposal = AdaptationProposal(
        tuple(conflicts),
        tuple(mutations),
        payload["rationale"],
        payload["resolvable"],
        targets_provided,
    )
    if proposal.resolvable:
        before = store.materialize()
        try:
            after = simulate_mutations(store, proposal.mutations)
        except ModelError as exc:
            raise ProposalRejected(f"mutations break model validity: {exc}") from exc
        problems = intent_violations(before, after)
        if problems:
            raise ProposalRejected("; ".join(problems))
    return proposal


def analyze_and_propose(
    store: GraphStore, provider, conflict_input: Mapping[str, Any]
) -> tuple[AdaptationProposal, AgentResult]:
    """Derive a checked adaptation proposal from mapped conflict information.

    A proposal failing the deterministic post-checks (intent preservation,
    model validity, provided-capability consent) is discarded and
    regenerated once before the failure is surfaced.
    """
    message = "Analyze and repair: " + json.dumps(conflict_input, sort_keys=True, default=str)
    tools = make_query_tools(store)
    attempts: list[AgentResult] = []
    last_rejection: ProposalRejected | None = None
    history: tuple[tuple[str, str], ...] = (("user", message),)
    for _ in range(2):
        result = run_agent("analyzer", provider, history, tools, QUERY_TOOLS)
        attempts.append(result)
        try:
            proposal = _materialize_proposal(store, result.payload)
        except ProposalRejected as exc:
            last_rejection = exc
            history = history + (
                ("user", f"The previous proposal was rejected: {exc}. Propose a repair "
                         "that preserves the user's stated intent."),
            )
            continue
        trace = tuple(r for a in attempts for r in a.trace)
        return proposal, AgentResult("analyzer", result.payload, trace)
    raise AgentError(f"no acceptable proposal after retry: {last_rejection}")


# --- repair ----------------------------------------------------------------


def apply_repair(
    store: GraphStore, proposal: AdaptationProposal, approval: ApprovalToken
) -> AgentResult:
    """Apply an approved proposal as one atomic change-set; no model involved."""
    if not proposal.resolvable:
        raise AgentError("cannot apply an unresolvable proposal")
    record = store.apply_mutation(list(proposal.mutations), approval)
    trace = tuple(
        ToolCallRecord(q.kind, {"query": serialize_query(q)}, "applied")
        for q in proposal.mutations
    )
    payload = {"change_record": record.to_json(), "replan": True}
    return AgentResult("repair", payload, trace)
