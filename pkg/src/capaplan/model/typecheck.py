"""Static type checking of constraint expressions against a property scope."""

from __future__ import annotations

from fractions import Fraction

from .errors import TypecheckError
from .types import (
    Add,
    And,
    Cmp,
    Expr,
    Iri,
    Lit,
    Mul,
    Neg,
    Not,
    Or,
    PropertyDecl,
    PropRef,
    Sub,
)

NUMERIC = ("integer", "real")


def _lit_type(value) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, Fraction):
        return "real"
    if isinstance(value, str):
        return "string"
    raise TypecheckError(f"unsupported literal: {value!r}")


def infer_type(expr: Expr, scope: dict[Iri, PropertyDecl]) -> str:
    """Infer the type of an expression, raising TypecheckError on any defect."""
    if isinstance(expr, Lit):
        return _lit_type(expr.value)
    if isinstance(expr, PropRef):
        decl = scope.get(expr.iri)
        if decl is None:
            raise TypecheckError(f"dangling property reference: {expr.iri}")
        return decl.datatype
    if isinstance(expr, Neg):
        t = infer_type(expr.operand, scope)
        if t not in NUMERIC:
            raise TypecheckError(f"negation of non-numeric operand ({t}) at Neg")
        return t
    if isinstance(expr, (Add, Sub, Mul)):
        lt = infer_type(expr.left, scope)
        rt = infer_type(expr.right, scope)
        node = type(expr).__name__
        if lt not in NUMERIC or rt not in NUMERIC:
            raise TypecheckError(f"type mismatch at {node}: {lt} vs {rt} (numeric required)")
        return "integer" if lt == rt == "integer" else "real"
    if isinstance(expr, Cmp):
        lt = infer_type(expr.left, scope)
        rt = infer_type(expr.right, scope)
        both_numeric = lt in NUMERIC and rt in NUMERIC
        if not both_numeric and lt != rt:
            raise TypecheckError(f"type mismatch at Cmp({expr.op}): {lt} vs {rt}")
        if expr.op in ("le", "lt", "ge", "gt") and not both_numeric:
            raise TypecheckError(f"ordering comparison requires numeric operands, got {lt}")
        return "boolean"
    if isinstance(expr, (And, Or)):
        node = type(expr).__name__
        for item in expr.items:
            t = infer_type(item, scope)
            if t != "boolean":
                raise TypecheckError(f"non-boolean child ({t}) at {node}")
        return "boolean"
    if isinstance(expr, Not):
        t = infer_type(expr.operand, scope)
        if t != "boolean":
            raise TypecheckError(f"non-boolean operand ({t}) at Not")
        return "boolean"
    raise TypecheckError(f"unknown expression node: {expr!r}")


def typecheck_constraint(expr: Expr, scope: dict[Iri, PropertyDecl]) -> str:
    """A constraint must be boolean-rooted and fully resolved in its scope."""
    t = infer_type(expr, scope)
    if t != "boolean":
        raise TypecheckError(f"constraint root must be boolean, got {t}")
    return t
