"""Model parsing, serialization round trips, and constraint evaluation."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from capaplan.model import (
    Capability,
    Iri,
    ModelValidationError,
    PropertyDecl,
    Resource,
    canonical_model,
    eval_constraint,
    model,
    model_to_triples,
    parse_model,
    serialize_model,
    triples_to_model,
    validate_model,
)
from capaplan.model.types import format_fraction, parse_numeric

from conftest import FIXTURES


@pytest.mark.parametrize("name", ["mps500.json", "depth_station.json"])
def test_fixture_parses_and_validates(name):
    m = parse_model((FIXTURES / name).read_text(encoding="utf-8"))
    validate_model(m)
    assert m.provided() and m.required()


@pytest.mark.parametrize("name", ["mps500.json", "depth_station.json"])
def test_json_turtle_round_trip(name, tmp_path):
    m = canonical_model(parse_model((FIXTURES / name).read_text(encoding="utf-8")))
    turtle = serialize_model(m, "turtle")
    back = canonical_model(parse_model(turtle, "turtle"))
    assert back == m
    # and the JSON form round-trips byte-for-byte once canonical
    text = serialize_model(m, "json")
    assert serialize_model(parse_model(text), "json") == text


@pytest.mark.parametrize("name", ["mps500.json", "depth_station.json"])
def test_triple_projection_is_inverse(name):
    m = canonical_model(parse_model((FIXTURES / name).read_text(encoding="utf-8")))
    assert canonical_model(triples_to_model(model_to_triples(m))) == m


def test_drill_constraint_boundaries(plant_model):
    drill = plant_model.capability(Iri("urn:mps:cap:drill"))
    depth = Iri("urn:mps:cap:drill:out:depth")

    def admissible(value):
        binding = {depth: value}
        return all(eval_constraint(c, binding) for c in drill.constraints)

    assert admissible(Fraction(5))        # lower bound is inclusive
    assert admissible(Fraction(10))       # upper bound is inclusive
    assert admissible(Fraction(7))
    assert not admissible(Fraction(2))
    assert not admissible(Fraction(12))
    assert not admissible(Fraction(499, 100))
    assert admissible(Fraction(1001, 100)) is False


def test_duplicate_property_name_same_role_rejected():
    decl = PropertyDecl(Iri("urn:t:p1"), "x", "integer", "output", "product", 1)
    dup = PropertyDecl(Iri("urn:t:p2"), "x", "integer", "output", "product", 2)
    cap = Capability(
        Iri("urn:t:c"), "provided", "test", Iri("urn:t:r"), (), (decl, dup), ()
    )
    with pytest.raises(ModelValidationError):
        model((Resource(Iri("urn:t:r"), "R"),), (cap,))


def test_same_name_across_roles_is_allowed():
    inp = PropertyDecl(Iri("urn:t:in"), "x", "integer", "input", "product", 1)
    out = PropertyDecl(Iri("urn:t:out"), "x", "integer", "output", "product", 2)
    cap = Capability(
        Iri("urn:t:c"), "provided", "test", Iri("urn:t:r"), (inp,), (out,), ()
    )
    validate_model(model((Resource(Iri("urn:t:r"), "R"),), (cap,)))


@given(st.fractions())
def test_fraction_format_round_trip(q):
    assert parse_numeric(format_fraction(q)) == q


@given(st.integers(min_value=-10**9, max_value=10**9))
def test_integer_format_round_trip(n):
    assert parse_numeric(str(n)) == n
