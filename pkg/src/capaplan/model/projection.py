"""Triple projection of capability models.

The fixed vocabulary below is the contract between the typed model layer,
the embedded graph store, and the Turtle-subset format. ``model_to_triples``
and ``triples_to_model`` are mutually inverse on valid models.

Projection rules (per entity):
  resource r        -> (r a cap:Resource), (r cap:name name)
  capability c      -> (c a cap:ProvidedCapability|cap:RequiredCapability),
                       (c cap:description text),
                       provided only: (c cap:providedBy resource)
  property p of c   -> (c cap:hasInput|cap:hasOutput p), (p a cap:Property),
                       (p cap:name n), (p cap:datatype d), (p cap:subject s),
                       constant only: (p cap:value v), unit only: (p cap:unit u)
  constraint i of c -> node k = <c.iri#c{i}>: (c cap:hasConstraint k),
                       (k a cap:Constraint), (k cap:index i),
                       (k cap:expression canonical-json),
                       (k cap:references q) per referenced property q
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ModelValidationError
from .jsonform import coerce_value, expr_from_json, expr_to_json
from .types import (
    Capability,
    CapabilityModel,
    Iri,
    Literal,
    PropertyDecl,
    Resource,
    format_fraction,
    prop_refs,
    validate_model,
)

VOCAB = "urn:cap:v1#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

CLASS_RESOURCE = VOCAB + "Resource"
CLASS_PROVIDED = VOCAB + "ProvidedCapability"
CLASS_REQUIRED = VOCAB + "RequiredCapability"
CLASS_PROPERTY = VOCAB + "Property"
CLASS_CONSTRAINT = VOCAB + "Constraint"

P_NAME = VOCAB + "name"
P_DESCRIPTION = VOCAB + "description"
P_PROVIDED_BY = VOCAB + "providedBy"
P_HAS_INPUT = VOCAB + "hasInput"
P_HAS_OUTPUT = VOCAB + "hasOutput"
P_DATATYPE = VOCAB + "datatype"
P_SUBJECT = VOCAB + "subject"
P_VALUE = VOCAB + "value"
P_UNIT = VOCAB + "unit"
P_HAS_CONSTRAINT = VOCAB + "hasConstraint"
P_INDEX = VOCAB + "index"
P_EXPRESSION = VOCAB + "expression"
P_REFERENCES = VOCAB + "references"

KNOWN_PREDICATES = frozenset(
    {
        RDF_TYPE,
        P_NAME,
        P_DESCRIPTION,
        P_PROVIDED_BY,
        P_HAS_INPUT,
        P_HAS_OUTPUT,
        P_DATATYPE,
        P_SUBJECT,
        P_VALUE,
        P_UNIT,
        P_HAS_CONSTRAINT,
        P_INDEX,
        P_EXPRESSION,
        P_REFERENCES,
    }
)


class IriTerm(str):
    """A triple term that is an IRI rather than a literal."""

    __slots__ = ()


Term = Union[IriTerm, Literal]


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: Term


class IntegrityError(ModelValidationError):
    """Triples do not form a valid model projection."""


def constraint_node(cap_iri: Iri, ordinal: int) -> str:
    return f"{cap_iri}#c{ordinal}"


def _value_literal(value: Literal) -> Term:
    return value


def model_to_triples(m: CapabilityModel) -> list[Triple]:
    out: list[Triple] = []

    def add(s: str, p: str, o: Term) -> None:
        out.append(Triple(s, p, o))

    for r in m.resources:
        add(r.iri.value, RDF_TYPE, IriTerm(CLASS_RESOURCE))
        add(r.iri.value, P_NAME, r.name)
    for c in m.capabilities:
        cls = CLASS_PROVIDED if c.kind == "provided" else CLASS_REQUIRED
        add(c.iri.value, RDF_TYPE, IriTerm(cls))
        add(c.iri.value, P_DESCRIPTION, c.description)
        if c.resource is not None:
            add(c.iri.value, P_PROVIDED_BY, IriTerm(c.resource.value))
        for pred, props in ((P_HAS_INPUT, c.inputs), (P_HAS_OUTPUT, c.outputs)):
            for p in props:
                add(c.iri.value, pred, IriTerm(p.iri.value))
                add(p.iri.value, RDF_TYPE, IriTerm(CLASS_PROPERTY))
                add(p.iri.value, P_NAME, p.name)
                add(p.iri.value, P_DATATYPE, p.datatype)
                add(p.iri.value, P_SUBJECT, p.subject)
                if p.value is not None:
                    add(p.iri.value, P_VALUE, _value_literal(p.value))
                if p.unit is not None:
                    add(p.iri.value, P_UNIT, p.unit)
        for i, expr in enumerate(c.constraints):
            k = constraint_node(c.iri, i)
            add(c.iri.value, P_HAS_CONSTRAINT, IriTerm(k))
            add(k, RDF_TYPE, IriTerm(CLASS_CONSTRAINT))
            add(k, P_INDEX, i)
            add(k, P_EXPRESSION, json.dumps(expr_to_json(expr), sort_keys=True))
            for q in prop_refs(expr):
                add(k, P_REFERENCES, IriTerm(q.value))
    return out


def _index(triples: list[Triple]) -> dict[str, dict[str, list[Term]]]:
    by_subject: dict[str, dict[str, list[Term]]] = {}
    for t in triples:
        by_subject.setdefault(t.subject, {}).setdefault(t.predicate, []).append(t.object)
    return by_subject


def _one(props: dict[str, list[Term]], pred: str, subject: str) -> Term:
    values = props.get(pred, [])
    if len(values) != 1:
        raise IntegrityError([f"{subject}: expected exactly one {pred}, found {len(values)}"])
    return values[0]


def _opt(props: dict[str, list[Term]], pred: str, subject: str) -> Term | None:
    values = props.get(pred, [])
    if len(values) > 1:
        raise IntegrityError([f"{subject}: expected at most one {pred}, found {len(values)}"])
    return values[0] if values else None


def triples_to_model(triples: list[Triple]) -> CapabilityModel:
    """Rebuild the typed model; raises IntegrityError on dangling triples."""
    by_subject = _index(triples)

    def prop_decl(iri: str, role: str) -> PropertyDecl:
        props = by_subject.get(iri)
        if props is None or IriTerm(CLASS_PROPERTY) not in props.get(RDF_TYPE, []):
            raise IntegrityError([f"dangling property reference: {iri}"])
        datatype = str(_one(props, P_DATATYPE, iri))
        raw = _opt(props, P_VALUE, iri)
        value: Literal | None = None
        if raw is not None:
            value = _coerce_triple_value(raw, datatype, iri)
        unit = _opt(props, P_UNIT, iri)
        return PropertyDecl(
            iri=Iri(iri),
            name=str(_one(props, P_NAME, iri)),
            datatype=datatype,
            role=role,
            subject=str(_one(props, P_SUBJECT, iri)),
            value=value,
            unit=str(unit) if unit is not None else None,
        )

    resources: list[Resource] = []
    capabilities: list[Capability] = []
    for subject in by_subject:
        props = by_subject[subject]
        types = props.get(RDF_TYPE, [])
        if IriTerm(CLASS_RESOURCE) in types:
            resources.append(Resource(Iri(subject), str(_one(props, P_NAME, subject))))
        elif IriTerm(CLASS_PROVIDED) in types or IriTerm(CLASS_REQUIRED) in types:
            kind = "provided" if IriTerm(CLASS_PROVIDED) in types else "required"
            resource_term = _opt(props, P_PROVIDED_BY, subject)
            inputs = tuple(
                prop_decl(o, "input") for o in sorted(str(t) for t in props.get(P_HAS_INPUT, []))
            )
            outputs = tuple(
                prop_decl(o, "output") for o in sorted(str(t) for t in props.get(P_HAS_OUTPUT, []))
            )
            constraint_nodes = [str(o) for o in props.get(P_HAS_CONSTRAINT, [])]
            ordered: list[tuple[int, object]] = []
            for k in constraint_nodes:
                kprops = by_subject.get(k)
                if kprops is None or IriTerm(CLASS_CONSTRAINT) not in kprops.get(RDF_TYPE, []):
                    raise IntegrityError([f"dangling constraint reference: {k}"])
                idx = _one(kprops, P_INDEX, k)
                if not isinstance(idx, int) or isinstance(idx, bool):
                    raise IntegrityError([f"{k}: constraint index must be an integer"])
                text = str(_one(kprops, P_EXPRESSION, k))
                ordered.append((idx, expr_from_json(json.loads(text))))
            ordered.sort(key=lambda pair: pair[0])
            if [i for i, _ in ordered] != list(range(len(ordered))):
                raise IntegrityError([f"{subject}: constraint ordinals are not dense from 0"])
            capabilities.append(
                Capability(
                    iri=Iri(subject),
                    kind=kind,
                    description=str(_one(props, P_DESCRIPTION, subject)),
                    resource=Iri(str(resource_term)) if resource_term is not None else None,
                    inputs=inputs,
                    outputs=outputs,
                    constraints=tuple(e for _, e in ordered),
                )
            )
    resources.sort(key=lambda r: r.iri.value)
    capabilities.sort(key=lambda c: c.iri.value)
    m = CapabilityModel(tuple(resources), tuple(capabilities))
    validate_model(m)
    return m


def _coerce_triple_value(raw: Term, datatype: str, subject: str) -> Literal:
    if isinstance(raw, IriTerm):
        raise IntegrityError([f"{subject}: value must be a literal"])
    if datatype == "real":
        if isinstance(raw, str):
            return coerce_value(raw, "real")
        if isinstance(raw, (int, Fraction)) and not isinstance(raw, bool):
            return Fraction(raw)
    try:
        return coerce_value(
            format_fraction(raw) if isinstance(raw, Fraction) else raw, datatype
        )
    except Exception as exc:
        raise IntegrityError([f"{subject}: {exc}"]) from exc
