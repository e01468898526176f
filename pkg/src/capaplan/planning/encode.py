"""Compilation of a planning problem into an SMT-LIB2 script.

Step semantics: at each of ``horizon`` steps, exactly one provided
capability executes or the step is a no-op. One state variable exists per
(product property name, step); capabilities read input properties from the
pre-step state and write output properties to the post-step state; frame
assertions equate untouched properties across a step; the goal (required
capability) is evaluated with inputs on the initial state and outputs on
the final state. Every assertion carries a parseable label so unsat cores
map back to model entities.

Per-capability assertion ordinals are laid out deterministically:
explicit constraints first, then constant property bindings (inputs,
outputs, information, in declaration order), then finite-grid memberships
for variable properties. Goal ordinals follow the same layout.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction

from ..model import (
    Add,
    And,
    Capability,
    Cmp,
    Expr,
    Iri,
    Lit,
    Literal,
    Mul,
    Neg,
    Not,
    Or,
    PropertyDecl,
    PropRef,
    Sub,
    format_fraction,
)
from .problem import AssertionLabel, PlanningProblem


class EncodeError(Exception):
    pass


def short_hash(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:8]


@dataclass(frozen=True)
class OrdinalInfo:
    """What one (capability, ordinal) or (goal, ordinal) assertion asserts."""

    kind: str  # constraint | input-binding | output-binding | info-binding | grid
    ordinal: int
    property_iri: Iri | None
    property_name: str | None  # product-state name, None for information props
    referenced_names: tuple[str, ...]  # product property names involved


@dataclass
class EncodingIndex:
    horizon: int
    cap_hash_to_iri: dict[str, Iri] = field(default_factory=dict)
    prop_hash_to_name: dict[str, str] = field(default_factory=dict)
    cap_ordinals: dict[str, list[OrdinalInfo]] = field(default_factory=dict)
    goal_ordinals: list[OrdinalInfo] = field(default_factory=list)
    sel_vars: dict[str, tuple[Iri, int]] = field(default_factory=dict)
    state_vars: dict[str, tuple[str, int]] = field(default_factory=dict)
    param_vars: dict[str, tuple[Iri, Iri, int]] = field(default_factory=dict)
    state_datatype: dict[str, str] = field(default_factory=dict)
    enum_values: dict[str, int] = field(default_factory=dict)

    def enum_lookup(self, code: int) -> str:
        for text, value in self.enum_values.items():
            if value == code:
                return text
        raise EncodeError(f"unknown enumeration code: {code}")


_SORTS = {"integer": "Int", "real": "Real", "boolean": "Bool", "string": "Int"}


def _lit_smt(value: Literal, enums: dict[str, int]) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return str(enums[value])
    if isinstance(value, Fraction):
        text = format_fraction(value)
        if "/" in text:
            num, den = text.split("/")
            return f"(/ {num} {den})" if not text.startswith("-") else f"(- (/ {num.lstrip('-')} {den}))"
        return f"(- {text.lstrip('-')})" if value < 0 else text
    return f"(- {-value})" if value < 0 else str(value)


def _expr_smt(expr: Expr, ctx: dict[Iri, str], enums: dict[str, int]) -> str:
    if isinstance(expr, Lit):
        return _lit_smt(expr.value, enums)
    if isinstance(expr, PropRef):
        try:
            return ctx[expr.iri]
        except KeyError as exc:
            raise EncodeError(f"unresolved property reference: {expr.iri}") from exc
    if isinstance(expr, Neg):
        return f"(- {_expr_smt(expr.operand, ctx, enums)})"
    if isinstance(expr, (Add, Sub, Mul)):
        op = {"Add": "+", "Sub": "-", "Mul": "*"}[type(expr).__name__]
        return f"({op} {_expr_smt(expr.left, ctx, enums)} {_expr_smt(expr.right, ctx, enums)})"
    if isinstance(expr, Cmp):
        op = {"le": "<=", "lt": "<", "ge": ">=", "gt": ">", "eq": "=", "ne": "distinct"}[expr.op]
        return f"({op} {_expr_smt(expr.left, ctx, enums)} {_expr_smt(expr.right, ctx, enums)})"
    if isinstance(expr, And):
        return "(and " + " ".join(_expr_smt(i, ctx, enums) for i in expr.items) + ")"
    if isinstance(expr, Or):
        return "(or " + " ".join(_expr_smt(i, ctx, enums) for i in expr.items) + ")"
    if isinstance(expr, Not):
        return f"(not {_expr_smt(expr.operand, ctx, enums)})"
    raise EncodeError(f"unsupported expression node: {expr!r}")


def _collect_strings(problem: PlanningProblem) -> dict[str, int]:
    strings: set[str] = set()

    def from_expr(expr: Expr) -> None:
        if isinstance(expr, Lit) and isinstance(expr.value, str):
            strings.add(expr.value)
        elif isinstance(expr, (Neg, Not)):
            from_expr(expr.operand)
        elif isinstance(expr, (Add, Sub, Mul, Cmp)):
            from_expr(expr.left)
            from_expr(expr.right)
        elif isinstance(expr, (And, Or)):
            for item in expr.items:
                from_expr(item)

    for cap in problem.domain.capabilities:
        for p in cap.properties:
            if isinstance(p.value, str):
                strings.add(p.value)
        for e in cap.constraints:
            from_expr(e)
    for values in problem.grids.values():
        for v in values:
            if isinstance(v, str):
                strings.add(v)
    return {text: i for i, text in enumerate(sorted(strings))}


def _state_properties(problem: PlanningProblem) -> dict[str, str]:
    """Product property name -> datatype, consistent across all capabilities."""
    out: dict[str, str] = {}
    goal = problem.domain.capability(problem.goal)
    for cap in list(problem.domain.provided()) + [goal]:
        for p in cap.properties:
            if p.subject != "product":
                continue
            if p.name in out and out[p.name] != p.datatype:
                raise EncodeError(
                    f"product property {p.name!r} has conflicting datatypes "
                    f"({out[p.name]} vs {p.datatype})"
                )
            out.setdefault(p.name, p.datatype)
    return out


def _ordinal_layout(cap: Capability, grids) -> list[tuple[OrdinalInfo, PropertyDecl | None]]:
    """The deterministic (ordinal -> assertion payload) layout for one capability."""
    product_names = {p.iri: p.name for p in cap.properties if p.subject == "product"}

    def referenced(expr: Expr) -> tuple[str, ...]:
        from ..model import prop_refs

        return tuple(sorted({product_names[i] for i in prop_refs(expr) if i in product_names}))

    out: list[tuple[OrdinalInfo, PropertyDecl | None]] = []
    ordinal = 0
    for expr in cap.constraints:
        out.append((OrdinalInfo("constraint", ordinal, None, None, referenced(expr)), None))
        ordinal += 1
    for p in cap.inputs + cap.outputs:
        if p.value is None:
            continue
        kind = f"{p.role}-binding" if p.subject == "product" else "info-binding"
        name = p.name if p.subject == "product" else None
        out.append((OrdinalInfo(kind, ordinal, p.iri, name, (p.name,) if name else ()), p))
        ordinal += 1
    for p in cap.inputs + cap.outputs:
        if p.value is not None or p.iri.value not in grids:
            continue
        name = p.name if p.subject == "product" else None
        out.append((OrdinalInfo("grid", ordinal, p.iri, name, (p.name,) if name else ()), p))
        ordinal += 1
    return out


def encode(problem: PlanningProblem, horizon: int) -> tuple[str, EncodingIndex]:
    if horizon < 1:
        raise EncodeError("horizon must be at least 1")
    goal = problem.domain.capability(problem.goal)
    provided = sorted(problem.domain.provided(), key=lambda c: c.iri.value)
    enums = _collect_strings(problem)
    states = _state_properties(problem)
    index = EncodingIndex(horizon=horizon, enum_values=enums)

    decls: list[str] = []
    asserts: list[str] = []

    def declare(name: str, sort: str) -> None:
        decls.append(f"(declare-const {name} {sort})")

    # selection variables
    sel: dict[tuple[str, int], str] = {}
    for cap in provided:
        h = short_hash(cap.iri.value)
        index.cap_hash_to_iri[h] = cap.iri
        for t in range(horizon):
            var = f"sel__{h}__s{t}"
            sel[(cap.iri.value, t)] = var
            index.sel_vars[var] = (cap.iri, t)
            declare(var, "Bool")

    # state variables
    state_var: dict[tuple[str, int], str] = {}
    for name in sorted(states):
        ph = short_hash(name)
        index.prop_hash_to_name[ph] = name
        index.state_datatype[name] = states[name]
        for t in range(horizon + 1):
            var = f"st__{ph}__s{t}"
            state_var[(name, t)] = var
            index.state_vars[var] = (name, t)
            declare(var, _SORTS[states[name]])

    # per-capability information parameter variables
    param_var: dict[tuple[str, str, int], str] = {}
    for cap in provided:
        h = short_hash(cap.iri.value)
        for p in cap.properties:
            if p.subject != "information":
                continue
            ph = short_hash(p.iri.value)
            for t in range(horizon):
                var = f"pp__{h}__{ph}__s{t}"
                param_var[(cap.iri.value, p.iri.value, t)] = var
                index.param_vars[var] = (cap.iri, p.iri, t)
                declare(var, _SORTS[p.datatype])

    def named(label: AssertionLabel, body: str) -> None:
        asserts.append(f"(assert (! {body} :named {label.label}))")

    # structural: at most one capability per step (no-op allowed)
    for t in range(horizon):
        vars_t = [sel[(cap.iri.value, t)] for cap in provided]
        if len(vars_t) < 2:
            body = "true"
        else:
            pairs = [
                f"(not (and {a} {b}))"
                for i, a in enumerate(vars_t)
                for b in vars_t[i + 1 :]
            ]
            body = "(and " + " ".join(pairs) + ")" if len(pairs) > 1 else pairs[0]
        named(AssertionLabel.for_structure(t), body)

    # capability assertions
    for cap in provided:
        h = short_hash(cap.iri.value)
        layout = _ordinal_layout(cap, problem.grids)
        index.cap_ordinals[cap.iri.value] = [info for info, _ in layout]
        for t in range(horizon):
            ctx: dict[Iri, str] = {}
            for p in cap.properties:
                if p.subject == "product":
                    at = t if p.role == "input" else t + 1
                    ctx[p.iri] = state_var[(p.name, at)]
                else:
                    ctx[p.iri] = param_var[(cap.iri.value, p.iri.value, t)]
            guard = sel[(cap.iri.value, t)]
            for info, decl in layout:
                if info.kind == "constraint":
                    body = _expr_smt(cap.constraints[info.ordinal], ctx, enums)
                elif info.kind == "grid":
                    var = ctx[decl.iri]
                    options = " ".join(
                        f"(= {var} {_lit_smt(v, enums)})" for v in problem.grids[decl.iri.value]
                    )
                    body = f"(or {options})"
                else:
                    body = f"(= {ctx[decl.iri]} {_lit_smt(decl.value, enums)})"
                named(
                    AssertionLabel.for_capability(h, info.ordinal, t),
                    f"(=> {guard} {body})",
                )

    # frame assertions
    writers: dict[str, list[Capability]] = {name: [] for name in states}
    for cap in provided:
        for p in cap.outputs:
            if p.subject == "product":
                writers[p.name].append(cap)
    for name in sorted(states):
        ph = short_hash(name)
        for t in range(horizon):
            keep = f"(= {state_var[(name, t + 1)]} {state_var[(name, t)]})"
            sels = [sel[(cap.iri.value, t)] for cap in writers[name]]
            if sels:
                untouched = "(and " + " ".join(f"(not {s})" for s in sels) + ")" if len(sels) > 1 else f"(not {sels[0]})"
                body = f"(=> {untouched} {keep})"
            else:
                body = keep
            named(AssertionLabel.for_frame(ph, t), body)

    # goal assertions
    goal_layout = _ordinal_layout(goal, problem.grids)
    index.goal_ordinals = [info for info, _ in goal_layout]
    goal_ctx: dict[Iri, str] = {}
    for p in goal.properties:
        if p.subject == "product":
            at = 0 if p.role == "input" else horizon
            goal_ctx[p.iri] = state_var[(p.name, at)]
        else:
            ph = short_hash(p.iri.value)
            var = f"gp__{ph}"
            declare(var, _SORTS[p.datatype])
            goal_ctx[p.iri] = var
    for info, decl in goal_layout:
        if info.kind == "constraint":
            body = _expr_smt(goal.constraints[info.ordinal], goal_ctx, enums)
        elif info.kind == "grid":
            options = " ".join(
                f"(= {goal_ctx[decl.iri]} {_lit_smt(v, enums)})"
                for v in problem.grids[decl.iri.value]
            )
            body = f"(or {options})"
        else:
            body = f"(= {goal_ctx[decl.iri]} {_lit_smt(decl.value, enums)})"
        named(AssertionLabel.for_goal(info.ordinal), body)

    script = "\n".join(
        [
            "(set-option :produce-unsat-cores true)",
            "(set-option :produce-models true)",
            "(set-logic ALL)",
            *decls,
            *asserts,
            "(check-sat)",
        ]
    )
    return script, index
