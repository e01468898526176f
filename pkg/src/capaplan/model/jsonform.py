"""Canonical JSON form of capability models.

Numeric ``real`` literals are carried as exact decimal strings (or ``p/q``
for non-terminating fractions) so that round-trips never pass through
binary floating point. This is the primary fixture format.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .errors import ModelSyntaxError, ModelValidationError
from .types import (
    Add,
    And,
    Capability,
    CapabilityModel,
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
    Resource,
    Sub,
    format_fraction,
    parse_numeric,
    validate_model,
)

_BINARY = {"add": Add, "sub": Sub, "mul": Mul}


def expr_to_json(expr: Expr) -> dict[str, Any]:
    if isinstance(expr, Lit):
        return {"kind": "lit", **_value_to_json(expr.value)}
    if isinstance(expr, PropRef):
        return {"kind": "prop", "iri": expr.iri.value}
    if isinstance(expr, Neg):
        return {"kind": "neg", "operand": expr_to_json(expr.operand)}
    if isinstance(expr, (Add, Sub, Mul)):
        kind = type(expr).__name__.lower()
        return {"kind": kind, "left": expr_to_json(expr.left), "right": expr_to_json(expr.right)}
    if isinstance(expr, Cmp):
        return {
            "kind": "cmp",
            "op": expr.op,
            "left": expr_to_json(expr.left),
            "right": expr_to_json(expr.right),
        }
    if isinstance(expr, (And, Or)):
        kind = "and" if isinstance(expr, And) else "or"
        return {"kind": kind, "items": [expr_to_json(i) for i in expr.items]}
    if isinstance(expr, Not):
        return {"kind": "not", "operand": expr_to_json(expr.operand)}
    raise ModelValidationError([f"unknown expression node: {expr!r}"])


def expr_from_json(obj: Any) -> Expr:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ModelSyntaxError(f"expression must be a tagged object, got {obj!r}")
    kind = obj["kind"]
    if kind == "lit":
        return Lit(_value_from_json(obj))
    if kind == "prop":
        return PropRef(Iri(obj["iri"]))
    if kind == "neg":
        return Neg(expr_from_json(obj["operand"]))
    if kind in _BINARY:
        return _BINARY[kind](expr_from_json(obj["left"]), expr_from_json(obj["right"]))
    if kind == "cmp":
        return Cmp(obj["op"], expr_from_json(obj["left"]), expr_from_json(obj["right"]))
    if kind == "and":
        return And(tuple(expr_from_json(i) for i in obj["items"]))
    if kind == "or":
        return Or(tuple(expr_from_json(i) for i in obj["items"]))
    if kind == "not":
        return Not(expr_from_json(obj["operand"]))
    raise ModelSyntaxError(f"unknown expression kind: {kind!r}")


def _value_to_json(value: Literal) -> dict[str, Any]:
    if isinstance(value, bool):
        return {"datatype": "boolean", "value": value}
    if isinstance(value, Fraction):
        return {"datatype": "real", "value": format_fraction(value)}
    if isinstance(value, int):
        return {"datatype": "integer", "value": value}
    return {"datatype": "string", "value": value}


def _value_from_json(obj: dict[str, Any]) -> Literal:
    datatype = obj.get("datatype")
    value = obj["value"]
    return coerce_value(value, datatype)


def coerce_value(value: Any, datatype: str | None) -> Literal:
    """Interpret a JSON-carried literal under a declared datatype."""
    if datatype == "real":
        if isinstance(value, bool):
            raise ModelSyntaxError(f"boolean is not a real literal: {value!r}")
        if isinstance(value, (int, float)):
            return Fraction(str(value))
        return parse_numeric(str(value))
    if datatype == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ModelSyntaxError(f"not an integer literal: {value!r}")
        return value
    if datatype == "boolean":
        if not isinstance(value, bool):
            raise ModelSyntaxError(f"not a boolean literal: {value!r}")
        return value
    if datatype == "string":
        if not isinstance(value, str):
            raise ModelSyntaxError(f"not a string literal: {value!r}")
        return value
    # untyped: infer from the JSON shape
    if isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    raise ModelSyntaxError(f"cannot interpret literal {value!r}")


def _prop_to_json(p: PropertyDecl) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "iri": p.iri.value,
        "name": p.name,
        "datatype": p.datatype,
        "role": p.role,
        "subject": p.subject,
    }
    if p.value is not None:
        obj["value"] = format_fraction(p.value) if isinstance(p.value, Fraction) else p.value
    if p.unit is not None:
        obj["unit"] = p.unit
    return obj


def _prop_from_json(obj: dict[str, Any]) -> PropertyDecl:
    value = None
    if "value" in obj:
        value = coerce_value(obj["value"], obj.get("datatype"))
    return PropertyDecl(
        iri=Iri(obj["iri"]),
        name=obj["name"],
        datatype=obj["datatype"],
        role=obj["role"],
        subject=obj["subject"],
        value=value,
        unit=obj.get("unit"),
    )


def model_to_json(m: CapabilityModel) -> dict[str, Any]:
    return {
        "resources": [{"iri": r.iri.value, "name": r.name} for r in m.resources],
        "capabilities": [
            {
                "iri": c.iri.value,
                "kind": c.kind,
                "description": c.description,
                **({"resource": c.resource.value} if c.resource is not None else {}),
                "inputs": [_prop_to_json(p) for p in c.inputs],
                "outputs": [_prop_to_json(p) for p in c.outputs],
                "constraints": [expr_to_json(e) for e in c.constraints],
            }
            for c in m.capabilities
        ],
    }


def model_from_json(obj: Any) -> CapabilityModel:
    if not isinstance(obj, dict):
        raise ModelSyntaxError("model document must be a JSON object")
    try:
        resources = tuple(
            Resource(Iri(r["iri"]), r["name"]) for r in obj.get("resources", [])
        )
        capabilities = tuple(
            Capability(
                iri=Iri(c["iri"]),
                kind=c["kind"],
                description=c.get("description", ""),
                resource=Iri(c["resource"]) if c.get("resource") else None,
                inputs=tuple(_prop_from_json(p) for p in c.get("inputs", [])),
                outputs=tuple(_prop_from_json(p) for p in c.get("outputs", [])),
                constraints=tuple(expr_from_json(e) for e in c.get("constraints", [])),
            )
            for c in obj.get("capabilities", [])
        )
    except KeyError as exc:
        raise ModelSyntaxError(f"missing required field: {exc.args[0]}") from exc
    m = CapabilityModel(resources, capabilities)
    validate_model(m)
    return m


def parse_json_model(text: str) -> CapabilityModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return model_from_json(obj)


def serialize_json_model(m: CapabilityModel) -> str:
    return json.dumps(model_to_json(m), indent=2) + "\n"
