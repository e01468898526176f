"""Capability model: typed domain, two interchangeable formats, evaluation."""

from __future__ import annotations

from .errors import (
    EvaluationError,
    ModelError,
    ModelSyntaxError,
    ModelValidationError,
    TypecheckError,
)
from .evaluate import eval_constraint, eval_expr
from .jsonform import (
    expr_from_json,
    expr_to_json,
    model_from_json,
    model_to_json,
    parse_json_model,
    serialize_json_model,
)
from .projection import (
    IntegrityError,
    IriTerm,
    Term,
    Triple,
    model_to_triples,
    triples_to_model,
)
from .turtle import parse_turtle_model, serialize_turtle_model
from .typecheck import infer_type, typecheck_constraint
from .types import (
    Add,
    And,
    Capability,
    CapabilityModel,
    Cmp,
    ConstraintExpr,
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
    canonical_model,
    format_fraction,
    format_literal,
    model,
    parse_numeric,
    prop_refs,
    validate_model,
)

FORMATS = ("json-form", "turtle-subset")

_ALIASES = {
    "json": "json-form",
    "json-form": "json-form",
    "turtle": "turtle-subset",
    "ttl": "turtle-subset",
    "turtle-subset": "turtle-subset",
}


def parse_model(
    text: str, format: str = "json-form", warnings: list[str] | None = None
) -> CapabilityModel:
    """Parse and validate a model document in either supported format.

    Turtle-subset parse warnings (rejected unknown predicates) are appended
    to ``warnings`` when a list is supplied.
    """
    fmt = _ALIASES.get(format)
    if fmt is None:
        raise ValueError(f"unknown model format: {format!r}")
    if fmt == "json-form":
        return parse_json_model(text)
    m, warns = parse_turtle_model(text)
    if warnings is not None:
        warnings.extend(warns)
    return m


def serialize_model(m: CapabilityModel, format: str = "json-form") -> str:
    fmt = _ALIASES.get(format)
    if fmt is None:
        raise ValueError(f"unknown model format: {format!r}")
    if fmt == "json-form":
        return serialize_json_model(m)
    return serialize_turtle_model(m)


__all__ = [
    "Add", "And", "Capability", "CapabilityModel", "Cmp", "ConstraintExpr",
    "EvaluationError", "Expr", "FORMATS", "IntegrityError", "Iri", "IriTerm",
    "Lit", "Literal", "ModelError", "ModelSyntaxError", "ModelValidationError",
    "Mul", "Neg", "Not", "Or", "PropRef", "PropertyDecl", "Resource", "Sub",
    "Term", "Triple", "TypecheckError", "canonical_model", "eval_constraint",
    "eval_expr", "expr_from_json", "expr_to_json", "format_fraction",
    "format_literal", "infer_type", "model", "model_from_json", "model_to_json",
    "model_to_triples", "parse_model", "parse_numeric", "prop_refs",
    "serialize_model", "triples_to_model", "typecheck_constraint",
    "validate_model",
]
