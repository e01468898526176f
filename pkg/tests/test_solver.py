"""Solver subprocess protocol: models, cores, and arithmetic edge cases."""

from fractions import Fraction

import pytest

from capaplan.solver.client import (
    Sat,
    SolverConfig,
    Unsat,
    parse_core,
    parse_model,
    run,
)

HEADER = (
    "(set-option :produce-unsat-cores true)\n"
    "(set-option :produce-models true)\n"
    "(set-logic ALL)\n"
)


def solve_script(body: str):
    return run(SolverConfig(), HEADER + body + "(check-sat)\n")


def test_sat_model_satisfies_bounds():
    result = solve_script(
        "(declare-const x Int)\n"
        "(assert (! (>= x 5) :named a1))\n"
        "(assert (! (<= x 7) :named a2))\n"
    )
    assert isinstance(result, Sat)
    model = parse_model(result.model_text)
    assert 5 <= model["x"] <= 7


def test_unsat_core_names_both_conflicting_assertions():
    result = solve_script(
        "(declare-const x Int)\n"
        "(assert (! (>= x 5) :named a1))\n"
        "(assert (! (<= x 3) :named a2))\n"
    )
    assert isinstance(result, Unsat)
    assert parse_core(result.core_text) == {"a1", "a2"}


def test_strict_inequalities_over_reals():
    result = solve_script(
        "(declare-const y Real)\n"
        "(assert (! (> y 0) :named a1))\n"
        "(assert (! (< y (/ 1 1000)) :named a2))\n"
    )
    assert isinstance(result, Sat)
    y = parse_model(result.model_text)["y"]
    assert Fraction(0) < y < Fraction(1, 1000)


def test_strict_bounds_unsat_over_equal_endpoints():
    result = solve_script(
        "(declare-const y Real)\n"
        "(assert (! (> y 1) :named a1))\n"
        "(assert (! (< y 1) :named a2))\n"
    )
    assert isinstance(result, Unsat)


def test_boolean_structure_with_disjunction():
    result = solve_script(
        "(declare-const p Bool)\n"
        "(declare-const q Bool)\n"
        "(assert (! (or p q) :named a1))\n"
        "(assert (! (not p) :named a2))\n"
    )
    assert isinstance(result, Sat)
    model = parse_model(result.model_text)
    assert model["q"] is True and model["p"] is False


def test_implication_guard_keeps_body_inactive():
    result = solve_script(
        "(declare-const sel Bool)\n"
        "(declare-const x Int)\n"
        "(assert (! (=> sel (and (>= x 5) (<= x 3))) :named a1))\n"
        "(assert (! (= x 0) :named a2))\n"
    )
    assert isinstance(result, Sat)
    assert parse_model(result.model_text)["sel"] is False


def test_equality_chain_propagates_through_sums():
    result = solve_script(
        "(declare-const a Real)\n"
        "(declare-const b Real)\n"
        "(assert (! (= (+ a b) 10) :named a1))\n"
        "(assert (! (= (- a b) 4) :named a2))\n"
    )
    assert isinstance(result, Sat)
    model = parse_model(result.model_text)
    assert model["a"] + model["b"] == 10
    assert model["a"] - model["b"] == 4


def test_unsat_core_covers_independent_conflicts():
    result = solve_script(
        "(declare-const x Int)\n"
        "(declare-const y Int)\n"
        "(assert (! (>= x 5) :named c1))\n"
        "(assert (! (<= x 3) :named c2))\n"
        "(assert (! (>= y 9) :named c3))\n"
        "(assert (! (<= y 1) :named c4))\n"
    )
    assert isinstance(result, Unsat)
    core = parse_core(result.core_text)
    # both variable-disjoint conflicts must be named, not just one
    assert {"c1", "c2"} <= core and {"c3", "c4"} <= core
