"""Triple store: queries, gated mutations, snapshots, and the change log."""

import pytest
from hypothesis import given, strategies as st

from capaplan.store import (
    ApprovalError,
    ApprovalToken,
    GraphStore,
    QuerySyntaxError,
    parse_query,
    serialize_query,
)

V = "urn:cap:v1#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


def token():
    return ApprovalToken("d-1", "approve")


def test_select_rows_are_sorted_and_stable(plant_store):
    q = f"SELECT ?n WHERE {{ ?r <{RDF_TYPE}> <{V}Resource> . ?r <{V}name> ?n . }}"
    rows = plant_store.query(q)
    assert rows == sorted(rows)
    assert plant_store.query(q) == rows
    names = [row[0] for row in rows]
    assert names == ["ConveyorBelt", "DrillingModule", "SupplyModule", "TransferRobot"]


def test_ask_true_and_false(plant_store):
    assert plant_store.query(f'ASK {{ ?r <{V}name> "DrillingModule" . }}') is True
    assert plant_store.query(f'ASK {{ ?r <{V}name> "MillingModule" . }}') is False


def test_filter_comparison(plant_store):
    q = (
        f"SELECT ?p ?v WHERE {{ ?p <{V}value> ?v . FILTER(?v > 7) }}"
    )
    rows = plant_store.query(q)
    assert all(row[1] > 7 for row in rows)
    assert any(row[0] == "urn:mps:req:move39:out:station" for row in rows)


def test_mutation_requires_usable_approval(plant_store):
    update = f"INSERT DATA {{ <urn:t:x> <{V}name> \"X\" . }}"
    with pytest.raises(ApprovalError):
        plant_store.apply_mutation(update, None)
    t = token()
    plant_store.apply_mutation(update, t)
    with pytest.raises(ApprovalError):
        plant_store.apply_mutation(update, t)  # tokens are single-use


def test_denied_token_is_not_usable(plant_store):
    with pytest.raises(ApprovalError):
        plant_store.apply_mutation(
            f"INSERT DATA {{ <urn:t:x> <{V}name> \"X\" . }}",
            ApprovalToken("d-2", "deny"),
        )


def test_change_log_and_rollback(plant_store):
    before = set(plant_store.triples)
    snap = plant_store.snapshot()
    plant_store.apply_mutation(
        f"DELETE DATA {{ <urn:mps:req:move39:out:station> <{V}value> 9 . }}",
        token(),
    )
    assert set(plant_store.triples) != before
    assert len(plant_store.change_log) == 1
    plant_store.rollback(snap)
    assert set(plant_store.triples) == before
    # rollback itself is a logged change
    assert [r.kind for r in plant_store.change_log] == ["repair", "rollback"]


def test_insert_then_delete_is_identity(plant_store):
    before = set(plant_store.triples)
    plant_store.apply_mutation(
        [
            f"INSERT DATA {{ <urn:t:x> <{V}name> \"X\" . }}",
            f"DELETE DATA {{ <urn:t:x> <{V}name> \"X\" . }}",
        ],
        token(),
    )
    assert set(plant_store.triples) == before


def test_query_round_trip():
    text = (
        f"SELECT ?c WHERE {{ ?c <{RDF_TYPE}> <{V}ProvidedCapability> . }}"
    )
    q = parse_query(text)
    assert parse_query(serialize_query(q)) == q


@pytest.mark.parametrize(
    "bad",
    [
        "SELECT WHERE { }",
        "DROP GRAPH <urn:g>",
        "SELECT ?x WHERE { ?x }",
        "INSERT DATA { ?v <urn:p> 1 . }",  # mutations must be concrete
    ],
)
def test_malformed_queries_rejected(bad):
    with pytest.raises(QuerySyntaxError):
        parse_query(bad)


@given(st.integers(min_value=0, max_value=10**6))
def test_integer_literal_insert_delete_round_trip(n):
    store = GraphStore()
    store.apply_mutation(
        f"INSERT DATA {{ <urn:t:x> <{V}value> {n} . }}", ApprovalToken("d", "approve")
    )
    assert len(store) == 1
    store.apply_mutation(
        f"DELETE DATA {{ <urn:t:x> <{V}value> {n} . }}", ApprovalToken("d2", "approve")
    )
    assert len(store) == 0
