"""Brute-force reference planner used to cross-check the symbolic pipeline.

Enumerates every capability sequence up to the horizon and every
combination of finite-grid values for unbound properties, simulating each
candidate with the exact expression evaluator. Deliberately shares no code
with the encoder or solver. Only fully finite problems are supported: the
goal's input constants must bind every product property and every unbound
property must carry a value grid; anything else raises
:class:`OracleBoundsError`.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterator

from ..model import (
    Capability,
    CapabilityModel,
    Cmp,
    EvaluationError,
    Iri,
    Lit,
    Literal,
    PropRef,
    PropertyDecl,
    Resource,
    eval_constraint,
    model,
)
from .problem import Plan, PlanningProblem, PlanStep


class OracleBoundsError(Exception):
    """The problem is not finitely enumerable by the reference planner."""


def _initial_state(problem: PlanningProblem) -> dict[str, Literal]:
    goal = problem.domain.capability(problem.goal)
    state: dict[str, Literal] = {}
    for p in goal.inputs:
        if p.subject == "product" and p.value is not None:
            state[p.name] = p.value
    needed = {
        p.name
        for cap in list(problem.domain.provided()) + [goal]
        for p in cap.properties
        if p.subject == "product"
    }
    missing = needed - set(state)
    if missing:
        raise OracleBoundsError(
            f"initial state not fully determined; unbound product properties: {sorted(missing)}"
        )
    return state


def _step_outcomes(
    cap: Capability, state: dict[str, Literal], problem: PlanningProblem
) -> Iterator[tuple[dict[Iri, Literal], dict[str, Literal]]]:
    """All consistent (assignment, successor-state) pairs for one step."""
    env: dict[Iri, Literal] = {}
    for p in cap.inputs:
        if p.subject == "product":
            value = state[p.name]
            if p.value is not None and value != p.value:
                return
            grid = problem.grids.get(p.iri.value)
            if grid is not None and value not in grid:
                return
            env[p.iri] = value
        elif p.value is not None:
            env[p.iri] = p.value
    for p in cap.outputs:
        if p.value is not None:
            env[p.iri] = p.value
    free: list[tuple[PropertyDecl, tuple[Literal, ...]]] = []
    for p in cap.properties:
        if p.iri in env or (p.subject == "product" and p.role == "input"):
            continue
        grid = problem.grids.get(p.iri.value)
        if grid is None:
            raise OracleBoundsError(
                f"property {p.iri} is unbound and has no finite value grid"
            )
        free.append((p, tuple(grid)))
    for combo in itertools.product(*(values for _, values in free)):
        trial = dict(env)
        for (p, _), value in zip(free, combo):
            trial[p.iri] = value
        try:
            if not all(eval_constraint(e, trial) for e in cap.constraints):
                continue
        except EvaluationError:
            continue
        successor = dict(state)
        for p in cap.outputs:
            if p.subject == "product":
                successor[p.name] = trial[p.iri]
        yield trial, successor


def _goal_holds(problem: PlanningProblem, initial: dict[str, Literal], final: dict[str, Literal]) -> bool:
    goal = problem.domain.capability(problem.goal)
    env: dict[Iri, Literal] = {}
    free: list[tuple[PropertyDecl, tuple[Literal, ...]]] = []
    for p in goal.properties:
        if p.subject == "product":
            value = (initial if p.role == "input" else final)[p.name]
            if p.value is not None and value != p.value:
                return False
            grid = problem.grids.get(p.iri.value)
            if grid is not None and value not in grid:
                return False
            env[p.iri] = value
        elif p.value is not None:
            env[p.iri] = p.value
        else:
            grid = problem.grids.get(p.iri.value)
            if grid is None:
                raise OracleBoundsError(
                    f"goal property {p.iri} is unbound and has no finite value grid"
                )
            free.append((p, tuple(grid)))
    for combo in itertools.product(*(values for _, values in free)):
        trial = dict(env)
        for (p, _), value in zip(free, combo):
            trial[p.iri] = value
        try:
            if all(eval_constraint(e, trial) for e in goal.constraints):
                return True
        except EvaluationError:
            continue
    return False


def oracle_solve(problem: PlanningProblem) -> Plan | None:
    """Exhaustively search for a plan; ``None`` means none exists in bounds."""
    initial = _initial_state(problem)
    provided = sorted(problem.domain.provided(), key=lambda c: c.iri.value)

    def search(state: dict[str, Literal], trace: list[tuple[Iri, dict[Iri, Literal]]], depth: int) -> Plan | None:
        if _goal_holds(problem, initial, state):
            steps = tuple(
                PlanStep(i, cap_iri, tuple(sorted(env.items(), key=lambda kv: kv[0].value)))
                for i, (cap_iri, env) in enumerate(trace)
            )
            return Plan(steps, tuple(sorted(initial.items())))
        if depth == problem.max_horizon:
            return None
        for cap in provided:
            for env, successor in _step_outcomes(cap, state, problem):
                found = search(successor, trace + [(cap.iri, env)], depth + 1)
                if found is not None:
                    return found
        return None

    return search(dict(initial), [], 0)


# --- random finite instances for cross-checking ---------------------------


def random_instance(rng: random.Random) -> PlanningProblem:
    """A random fully finite problem the oracle and planner must agree on.

    Product properties are integers over a small grid, the initial state is
    fully bound by the goal's input constants, and every unbound property
    carries a grid, so the enumerable and symbolic searches cover the same
    candidate space.
    """
    names = [f"p{i}" for i in range(rng.randint(1, 3))]
    grid_values = tuple(range(0, rng.randint(3, 5)))
    counter = itertools.count()

    def prop(prefix: str, name: str, role: str, value: Literal | None) -> PropertyDecl:
        return PropertyDecl(
            Iri(f"urn:rnd:{prefix}:{name}:{next(counter)}"),
            name,
            "integer",
            role,
            "product",
            value,
        )

    grids: dict[str, tuple[Literal, ...]] = {}
    resources = [Resource(Iri("urn:rnd:res:0"), "cell")]
    caps = []
    for c in range(rng.randint(1, 3)):
        inputs = []
        outputs = []
        constraints = []
        for name in names:
            if rng.random() < 0.6:
                const = rng.choice(grid_values) if rng.random() < 0.4 else None
                p = prop(f"c{c}i", name, "input", const)
                if const is None:
                    grids[p.iri.value] = grid_values
                inputs.append(p)
            if rng.random() < 0.6:
                const = rng.choice(grid_values) if rng.random() < 0.4 else None
                p = prop(f"c{c}o", name, "output", const)
                if const is None:
                    grids[p.iri.value] = grid_values
                outputs.append(p)
        for p in inputs + outputs:
            if rng.random() < 0.3:
                op = rng.choice(["le", "ge", "eq", "ne"])
                constraints.append(Cmp(op, PropRef(p.iri), Lit(rng.choice(grid_values))))
        caps.append(
            Capability(
                Iri(f"urn:rnd:cap:{c}"),
                "provided",
                f"random capability {c}",
                resources[0].iri,
                tuple(inputs),
                tuple(outputs),
                tuple(constraints),
            )
        )
    goal_inputs = tuple(
        prop("gi", name, "input", rng.choice(grid_values)) for name in names
    )
    goal_outputs = []
    goal_constraints = []
    for name in rng.sample(names, rng.randint(1, len(names))):
        p = prop("go", name, "output", None)
        grids[p.iri.value] = grid_values
        goal_outputs.append(p)
        goal_constraints.append(
            Cmp(rng.choice(["le", "ge", "eq"]), PropRef(p.iri), Lit(rng.choice(grid_values)))
        )
    goal = Capability(
        Iri("urn:rnd:goal"),
        "required",
        "random goal",
        None,
        goal_inputs,
        tuple(goal_outputs),
        tuple(goal_constraints),
    )
    domain = model(resources, caps + [goal])
    return PlanningProblem(
        Iri("urn:rnd:goal"), domain, max_horizon=rng.randint(1, 2), grids=grids
    )
