"""End-to-end planning: iterative deepening, decoding, core mapping, replay.

``solve`` deepens the horizon from 1 to ``max_horizon``, returning the
first satisfiable plan or the diagnosis produced at the deepest horizon.
Results are cached on the full problem/configuration key, which is sound
because both the encoding and the solver are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from ..model import (
    Capability,
    EvaluationError,
    Iri,
    Literal,
    eval_constraint,
    serialize_json_model,
)
from ..solver import client
from .encode import EncodingIndex, OrdinalInfo, encode
from .problem import (
    AssertionLabel,
    CapabilityConstraintOrigin,
    GoalConstraintOrigin,
    Plan,
    PlanningProblem,
    PlanningResult,
    PlanStep,
    SatResult,
    UnsatDiagnosis,
    UnsatResult,
)


class PlanningError(Exception):
    pass


class SolverTimeoutError(PlanningError):
    """The solver process exceeded its time budget."""


class InternalSolverError(PlanningError):
    """The solver misbehaved: unknown verdict or a protocol violation."""


_CACHE: dict[tuple, PlanningResult] = {}


def clear_solve_cache() -> None:
    _CACHE.clear()


def _problem_key(problem: PlanningProblem, config: client.SolverConfig) -> tuple:
    grids = tuple(sorted((k, tuple(v)) for k, v in problem.grids.items()))
    return (
        serialize_json_model(problem.domain),
        problem.goal.value,
        problem.max_horizon,
        grids,
        config,
    )


def _convert(datatype: str, raw: Literal, index: EncodingIndex) -> Literal:
    if datatype == "string":
        return index.enum_lookup(int(raw))
    if datatype == "boolean":
        return bool(raw)
    if datatype == "integer":
        return int(raw)
    return Fraction(raw)


def decode(model_values: Mapping[str, Literal], index: EncodingIndex, problem: PlanningProblem) -> Plan:
    """Turn a satisfying assignment into a plan, dropping no-op steps."""
    state_lookup = {(name, t): var for var, (name, t) in index.state_vars.items()}
    param_lookup = {
        (cap.value, prop.value, t): var for var, (cap, prop, t) in index.param_vars.items()
    }

    def state_value(name: str, t: int) -> Literal:
        return _convert(index.state_datatype[name], model_values[state_lookup[(name, t)]], index)

    initial_state = tuple(
        (name, state_value(name, 0)) for name in sorted(index.state_datatype)
    )
    selected: dict[int, Iri] = {}
    for var, (cap_iri, t) in index.sel_vars.items():
        if model_values.get(var) is True:
            if t in selected:
                raise InternalSolverError(f"two capabilities selected at step {t}")
            selected[t] = cap_iri

    steps: list[PlanStep] = []
    for t in sorted(selected):
        cap = problem.domain.capability(selected[t])
        assignments: list[tuple[Iri, Literal]] = []
        for p in cap.properties:
            if p.subject == "product":
                at = t if p.role == "input" else t + 1
                value = state_value(p.name, at)
            else:
                raw = model_values[param_lookup[(cap.iri.value, p.iri.value, t)]]
                value = _convert(p.datatype, raw, index)
            assignments.append((p.iri, value))
        steps.append(PlanStep(len(steps), cap.iri, tuple(assignments)))
    return Plan(tuple(steps), initial_state)


def map_core(core_labels: set[str], index: EncodingIndex) -> UnsatDiagnosis:
    """Resolve solver core labels back to model-entity origins."""
    labels = tuple(sorted(core_labels))
    origins = tuple(
        AssertionLabel(label).parse(index.cap_hash_to_iri, index.prop_hash_to_name)
        for label in labels
    )
    return UnsatDiagnosis(labels, origins, index.horizon)


@dataclass(frozen=True)
class ConflictPair:
    """A goal demand and a capability restriction clashing over shared properties."""

    goal_ordinal: int
    goal_kind: str
    capability: Iri
    capability_ordinals: tuple[int, ...]
    shared_properties: tuple[str, ...]


def conflict_pairs(diagnosis: UnsatDiagnosis, index: EncodingIndex) -> tuple[ConflictPair, ...]:
    """Pair goal-side and capability-side core members sharing a product property.

    Goal input bindings describe the starting state rather than a demand, so
    only explicit goal constraints and output bindings participate. Pairs
    are aggregated per (goal demand, capability): a range expressed as two
    inequalities is one conflict, not two.
    """
    goal_members: list[tuple[GoalConstraintOrigin, OrdinalInfo]] = []
    cap_members: list[tuple[CapabilityConstraintOrigin, OrdinalInfo]] = []
    for origin in diagnosis.origins:
        if isinstance(origin, GoalConstraintOrigin):
            info = index.goal_ordinals[origin.ordinal]
            if info.kind in ("constraint", "output-binding"):
                goal_members.append((origin, info))
        elif isinstance(origin, CapabilityConstraintOrigin):
            info = index.cap_ordinals[origin.capability.value][origin.ordinal]
            cap_members.append((origin, info))
    grouped: dict[tuple[int, str], dict] = {}
    for goal_origin, goal_info in goal_members:
        for cap_origin, cap_info in cap_members:
            shared = set(goal_info.referenced_names) & set(cap_info.referenced_names)
            if not shared:
                continue
            key = (goal_origin.ordinal, cap_origin.capability.value)
            entry = grouped.setdefault(
                key,
                {
                    "kind": goal_info.kind,
                    "capability": cap_origin.capability,
                    "ordinals": set(),
                    "shared": set(),
                },
            )
            entry["ordinals"].add(cap_origin.ordinal)
            entry["shared"].update(shared)
    pairs = [
        ConflictPair(
            goal_ordinal,
            entry["kind"],
            entry["capability"],
            tuple(sorted(entry["ordinals"])),
            tuple(sorted(entry["shared"])),
        )
        for (goal_ordinal, _), entry in sorted(grouped.items())
    ]
    return tuple(pairs)


def solve(
    problem: PlanningProblem, config: client.SolverConfig | None = None
) -> PlanningResult:
    """Find a plan by deepening the step bound, or diagnose infeasibility."""
    cfg = config or client.SolverConfig()
    key = _problem_key(problem, cfg)
    if key in _CACHE:
        return _CACHE[key]
    last_diagnosis: UnsatDiagnosis | None = None
    for horizon in range(1, problem.max_horizon + 1):
        script, index = encode(problem, horizon)
        verdict = client.run(cfg, script)
        if isinstance(verdict, client.Timeout):
            raise SolverTimeoutError(f"solver timed out at horizon {horizon}")
        if isinstance(verdict, client.Unknown):
            raise InternalSolverError(f"solver answered unknown at horizon {horizon}")
        if isinstance(verdict, client.ProtocolError):
            raise InternalSolverError(f"solver protocol failure: {verdict.detail}")
        if isinstance(verdict, client.Sat):
            plan = decode(client.parse_model(verdict.model_text), index, problem)
            result: PlanningResult = SatResult(plan)
            _CACHE[key] = result
            return result
        core = client.parse_core(verdict.core_text)
        if not core:
            raise InternalSolverError(f"empty unsat core at horizon {horizon}")
        last_diagnosis = map_core(core, index)
    assert last_diagnosis is not None
    result = UnsatResult(last_diagnosis)
    _CACHE[key] = result
    return result


def _step_env(cap: Capability, assignments: Mapping[Iri, Literal]) -> dict[Iri, Literal]:
    env: dict[Iri, Literal] = {}
    for p in cap.properties:
        if p.iri not in assignments:
            raise PlanningError(f"plan step omits property {p.iri}")
        env[p.iri] = assignments[p.iri]
    return env


def replay_plan(plan: Plan, problem: PlanningProblem) -> bool:
    """Re-validate a plan by direct simulation, independent of the solver."""
    state: dict[str, Literal] = dict(plan.initial_state)

    def check_membership(p, value: Literal) -> bool:
        if p.value is not None and value != p.value:
            return False
        grid = problem.grids.get(p.iri.value)
        return grid is None or value in grid

    for step in plan.steps:
        cap = problem.domain.capability(step.capability)
        env = _step_env(cap, step.assignment_map())
        for p in cap.properties:
            if not check_membership(p, env[p.iri]):
                return False
            if p.subject == "product" and p.role == "input":
                if p.name in state and env[p.iri] != state[p.name]:
                    return False
        try:
            if not all(eval_constraint(e, env) for e in cap.constraints):
                return False
        except EvaluationError:
            return False
        for p in cap.outputs:
            if p.subject == "product":
                state[p.name] = env[p.iri]

    goal = problem.domain.capability(problem.goal)
    initial = dict(plan.initial_state)
    goal_env: dict[Iri, Literal] = {}
    for p in goal.properties:
        if p.subject == "product":
            source = initial if p.role == "input" else state
            if p.name not in source:
                return False
            value = source[p.name]
        elif p.value is not None:
            value = p.value
        else:
            raise PlanningError(
                f"cannot replay goal with unbound non-product property {p.iri}"
            )
        if not check_membership(p, value):
            return False
        goal_env[p.iri] = value
    try:
        return all(eval_constraint(e, goal_env) for e in goal.constraints)
    except EvaluationError:
        return False
