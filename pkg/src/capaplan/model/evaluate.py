"""Exact evaluation of constraint expressions under a property binding."""

from __future__ import annotations

from fractions import Fraction

from .errors import EvaluationError
from .types import (
    Add,
    And,
    Cmp,
    Expr,
    Iri,
    Lit,
    Literal,
    Mul,
    Neg,
    Not,
    Or,
    PropRef,
    Sub,
)


def eval_expr(expr: Expr, binding: dict[Iri, Literal]) -> Literal:
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, PropRef):
        if expr.iri not in binding:
            raise EvaluationError(f"unbound property reference: {expr.iri}")
        return binding[expr.iri]
    if isinstance(expr, Neg):
        return -_num(eval_expr(expr.operand, binding))
    if isinstance(expr, Add):
        return _num(eval_expr(expr.left, binding)) + _num(eval_expr(expr.right, binding))
    if isinstance(expr, Sub):
        return _num(eval_expr(expr.left, binding)) - _num(eval_expr(expr.right, binding))
    if isinstance(expr, Mul):
        return _num(eval_expr(expr.left, binding)) * _num(eval_expr(expr.right, binding))
    if isinstance(expr, Cmp):
        left = eval_expr(expr.left, binding)
        right = eval_expr(expr.right, binding)
        if expr.op == "eq":
            return left == right
        if expr.op == "ne":
            return left != right
        lnum, rnum = _num(left), _num(right)
        if expr.op == "le":
            return lnum <= rnum
        if expr.op == "lt":
            return lnum < rnum
        if expr.op == "ge":
            return lnum >= rnum
        return lnum > rnum
    if isinstance(expr, And):
        return all(bool(eval_expr(i, binding)) for i in expr.items)
    if isinstance(expr, Or):
        return any(bool(eval_expr(i, binding)) for i in expr.items)
    if isinstance(expr, Not):
        return not eval_expr(expr.operand, binding)
    raise EvaluationError(f"unknown expression node: {expr!r}")


def eval_constraint(expr: Expr, binding: dict[Iri, Literal]) -> bool:
    """Evaluate a boolean-rooted constraint; total on type-checked expressions."""
    result = eval_expr(expr, binding)
    if not isinstance(result, bool):
        raise EvaluationError(f"constraint did not evaluate to a boolean: {result!r}")
    return result


def _num(value: Literal) -> int | Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
        raise EvaluationError(f"numeric operand expected, got {value!r}")
    return value
