"""Embedded triple store over the capability model.

Implements a restricted SPARQL-shaped language (basic graph patterns,
comparison FILTERs, INSERT DATA / DELETE DATA), a change log with logical
timestamps, and snapshot/rollback. Mutations require an approved, unconsumed
approval token; this is the enforcement point of the human-approval
guarantee. Many readers may query concurrently; writers are serialized.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

from .model import (
    CapabilityModel,
    IriTerm,
    Literal,
    Term,
    Triple,
    format_literal,
    model_to_triples,
    parse_numeric,
    triples_to_model,
)


class StoreError(Exception):
    pass


class QuerySyntaxError(StoreError):
    pass


class ApprovalError(StoreError):
    """Mutation attempted without a valid, unconsumed approval."""


class UnknownSnapshotError(StoreError):
    pass


@dataclass(frozen=True)
class Var:
    name: str


PatternTerm = Union[Var, IriTerm, Literal]

FILTER_OPS = ("<=", ">=", "!=", "<", ">", "=")


@dataclass(frozen=True)
class FilterExpr:
    var: str
    op: str
    value: Literal


@dataclass(frozen=True)
class QueryForm:
    kind: str  # select | ask | insert | delete
    result_vars: tuple[str, ...] = ()
    patterns: tuple[tuple[PatternTerm, PatternTerm, PatternTerm], ...] = ()
    filters: tuple[FilterExpr, ...] = ()
    triples: tuple[Triple, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "select" and not self.result_vars:
            raise QuerySyntaxError("SELECT must declare at least one result variable")
        if self.kind in ("insert", "delete") and not self.triples:
            raise QuerySyntaxError("updates must carry at least one concrete triple")


@dataclass
class ApprovalToken:
    """Single-use permission to mutate the store, minted by a HitL decision."""

    decision_id: str
    verdict: str  # approve | modify | deny
    consumed: bool = False

    def usable(self) -> bool:
        return self.verdict in ("approve", "modify") and not self.consumed


@dataclass(frozen=True)
class ChangeRecord:
    sequence: int
    inserted: tuple[Triple, ...]
    deleted: tuple[Triple, ...]
    approval_ref: str | None
    timestamp: int
    kind: str = "repair"  # repair | rollback

    def to_json(self) -> dict:
        return {
            "sequence": self.sequence,
            "inserted": [triple_to_json(t) for t in self.inserted],
            "deleted": [triple_to_json(t) for t in self.deleted],
            "approval_ref": self.approval_ref,
            "timestamp": self.timestamp,
            "kind": self.kind,
        }


def term_to_json(term: Term) -> dict:
    if isinstance(term, IriTerm):
        return {"iri": str(term)}
    if isinstance(term, Fraction):
        return {"lit": format_literal(term), "datatype": "real"}
    if isinstance(term, bool):
        return {"lit": term, "datatype": "boolean"}
    if isinstance(term, int):
        return {"lit": term, "datatype": "integer"}
    return {"lit": term, "datatype": "string"}


def term_from_json(obj: dict) -> Term:
    if "iri" in obj:
        return IriTerm(obj["iri"])
    value, datatype = obj["lit"], obj.get("datatype")
    if datatype == "real":
        return parse_numeric(str(value))
    return value


def triple_to_json(t: Triple) -> dict:
    return {"s": t.subject, "p": t.predicate, "o": term_to_json(t.object)}


def triple_from_json(obj: dict) -> Triple:
    return Triple(obj["s"], obj["p"], term_from_json(obj["o"]))


def _term_sort_key(term: Term) -> tuple:
    if isinstance(term, IriTerm):
        return (0, str(term))
    return (1, format_literal(term))


def _triple_sort_key(t: Triple) -> tuple:
    return (t.subject, t.predicate) + _term_sort_key(t.object)


# --- query text -----------------------------------------------------------

_Q_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<var>\?[A-Za-z_]\w*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>[+-]?\d+(?:\.\d+)?)
  | (?P<op><=|>=|!=|<|>|=)
  | (?P<punct>[{}().])
  | (?P<word>[A-Za-z_][\w]*)
    """,
    re.VERBOSE,
)


def _q_tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _Q_TOKEN.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(0)))
        pos = m.end()
    tokens.append(("eof", ""))
    return tokens


def parse_query(text: str) -> QueryForm:
    tokens = _q_tokenize(text)
    i = 0

    def peek():
        return tokens[i]

    def advance():
        nonlocal i
        tok = tokens[i]
        i += 1
        return tok

    def expect(kind, value=None):
        tok = advance()
        if tok[0] != kind or (value is not None and tok[1].upper() != value):
            raise QuerySyntaxError(f"expected {value or kind}, got {tok[1]!r}")
        return tok

    def term(concrete: bool = False) -> PatternTerm:
        kind, value = advance()
        if kind == "iri":
            return IriTerm(value[1:-1])
        if kind == "var":
            if concrete:
                raise QuerySyntaxError("variables are not allowed in update data")
            return Var(value[1:])
        if kind == "string":
            return value[1:-1].replace('\\"', '"').replace("\\\\", "\\")
        if kind == "number":
            return Fraction(value) if "." in value else int(value)
        if kind == "word" and value in ("true", "false"):
            return value == "true"
        raise QuerySyntaxError(f"expected term, got {value!r}")

    def group(concrete: bool):
        expect("punct", "{")
        patterns = []
        filters = []
        while peek()[0] != "punct" or peek()[1] != "}":
            if peek()[0] == "word" and peek()[1].upper() == "FILTER":
                advance()
                expect("punct", "(")
                kind, value = advance()
                if kind != "var":
                    raise QuerySyntaxError("FILTER must compare a variable")
                op = expect("op")[1]
                rhs = term()
                if isinstance(rhs, Var):
                    raise QuerySyntaxError("FILTER right-hand side must be a literal")
                expect("punct", ")")
                filters.append(FilterExpr(value[1:], op, rhs))
                continue
            s = term(concrete)
            p = term(concrete)
            o = term(concrete)
            if peek() == ("punct", "."):
                advance()
            patterns.append((s, p, o))
        advance()  # closing brace
        return patterns, filters

    head = expect("word")[1].upper()
    if head == "SELECT":
        result_vars = []
        while peek()[0] == "var":
            result_vars.append(advance()[1][1:])
        expect("word", "WHERE")
        patterns, filters = group(concrete=False)
        return QueryForm("select", tuple(result_vars), tuple(patterns), tuple(filters))
    if head == "ASK":
        patterns, filters = group(concrete=False)
        return QueryForm("ask", (), tuple(patterns), tuple(filters))
    if head in ("INSERT", "DELETE"):
        expect("word", "DATA")
        patterns, filters = group(concrete=True)
        if filters:
            raise QuerySyntaxError("FILTER is not allowed in update data")
        triples = tuple(
            Triple(str(s), str(p), o)
            for s, p, o in patterns
        )
        for s, p, _o in patterns:
            if not isinstance(s, IriTerm) or not isinstance(p, IriTerm):
                raise QuerySyntaxError("update subjects and predicates must be IRIs")
        return QueryForm(head.lower(), (), (), (), triples)
    raise QuerySyntaxError(f"unknown query form: {head}")


def serialize_query(q: QueryForm) -> str:
    def fmt(term: PatternTerm) -> str:
        if isinstance(term, Var):
            return f"?{term.name}"
        if isinstance(term, IriTerm):
            return f"<{term}>"
        if isinstance(term, str):
            escaped = term.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        return format_literal(term)

    if q.kind in ("insert", "delete"):
        body = " ".join(
            f"{fmt(IriTerm(t.subject))} {fmt(IriTerm(t.predicate))} {fmt(t.object)} ."
            for t in q.triples
        )
        return f"{q.kind.upper()} DATA {{ {body} }}"
    body = " ".join(f"{fmt(s)} {fmt(p)} {fmt(o)} ." for s, p, o in q.patterns)
    body += "".join(f" FILTER (?{f.var} {f.op} {fmt(f.value)})" for f in q.filters)
    if q.kind == "select":
        head = "SELECT " + " ".join(f"?{v}" for v in q.result_vars)
        return f"{head} WHERE {{ {body} }}"
    return f"ASK {{ {body} }}"


# --- store ----------------------------------------------------------------


class GraphStore:
    """In-memory triple store; writers serialized, snapshots atomic."""

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: frozenset[Triple] = frozenset(triples)
        self._lock = threading.RLock()
        self._clock = 0
        self._snapshots: dict[str, frozenset[Triple]] = {}
        self._snapshot_seq = 0
        self.change_log: list[ChangeRecord] = []

    @classmethod
    def load(cls, m: CapabilityModel) -> "GraphStore":
        return cls(model_to_triples(m))

    def _tick(self) -> int:
        self._clock += 1
        return self._clock

    @property
    def triples(self) -> list[Triple]:
        return sorted(self._triples, key=_triple_sort_key)

    def __len__(self) -> int:
        return len(self._triples)

    def materialize(self) -> CapabilityModel:
        return triples_to_model(self.triples)

    # --- queries ---------------------------------------------------------

    def query(self, q: QueryForm | str):
        if isinstance(q, str):
            q = parse_query(q)
        if q.kind not in ("select", "ask"):
            raise StoreError("query() accepts select/ask forms only")
        snapshot = self._triples
        rows = _match(snapshot, q)
        if q.kind == "ask":
            return bool(rows)
        table = [tuple(row.get(v) for v in q.result_vars) for row in rows]
        table.sort(key=lambda row: tuple(_none_key(v) for v in row))
        return table

    # --- mutations -------------------------------------------------------

    def apply_mutation(
        self, q: QueryForm | str | list[QueryForm | str], approval: ApprovalToken | None
    ) -> ChangeRecord:
        """Apply one update (or an atomic change-set) under an approval token."""
        if approval is None:
            raise ApprovalError("mutation rejected: no approval supplied")
        if not approval.usable():
            reason = "denied" if approval.verdict == "deny" else (
                "already consumed" if approval.consumed else f"verdict {approval.verdict!r}"
            )
            raise ApprovalError(f"mutation rejected: approval {approval.decision_id} {reason}")
        forms = q if isinstance(q, list) else [q]
        parsed = [parse_query(f) if isinstance(f, str) else f for f in forms]
        for form in parsed:
            if form.kind not in ("insert", "delete"):
                raise StoreError(f"not an update form: {form.kind}")
        with self._lock:
            inserted: list[Triple] = []
            deleted: list[Triple] = []
            new = set(self._triples)
            for form in parsed:
                if form.kind == "insert":
                    for t in form.triples:
                        if t not in new:
                            new.add(t)
                            inserted.append(t)
                else:
                    for t in form.triples:
                        if t in new:
                            new.discard(t)
                            deleted.append(t)
            approval.consumed = True
            self._triples = frozenset(new)
            record = ChangeRecord(
                sequence=len(self.change_log),
                inserted=tuple(inserted),
                deleted=tuple(deleted),
                approval_ref=approval.decision_id,
                timestamp=self._tick(),
            )
            self.change_log.append(record)
            return record

    # --- snapshots -------------------------------------------------------

    def snapshot(self) -> str:
        with self._lock:
            self._snapshot_seq += 1
            sid = f"snap-{self._snapshot_seq}"
            self._snapshots[sid] = self._triples
            return sid

    def rollback(self, snapshot_id: str) -> ChangeRecord:
        with self._lock:
            if snapshot_id not in self._snapshots:
                raise UnknownSnapshotError(f"unknown snapshot id: {snapshot_id}")
            target = self._snapshots[snapshot_id]
            inserted = tuple(sorted(target - self._triples, key=_triple_sort_key))
            deleted = tuple(sorted(self._triples - target, key=_triple_sort_key))
            self._triples = target
            record = ChangeRecord(
                sequence=len(self.change_log),
                inserted=inserted,
                deleted=deleted,
                approval_ref=None,
                timestamp=self._tick(),
                kind="rollback",
            )
            self.change_log.append(record)
            return record

    def export_change_log(self) -> str:
        """Line-delimited canonical JSON, one record per line."""
        return "".join(json.dumps(r.to_json(), sort_keys=True) + "\n" for r in self.change_log)


def _none_key(value):
    return ("",) if value is None else _term_sort_key(value)


def _match(triples: frozenset[Triple], q: QueryForm) -> list[dict[str, Term]]:
    def unify(pattern: PatternTerm, value, binding: dict[str, Term]):
        if isinstance(pattern, Var):
            if pattern.name in binding:
                return binding if binding[pattern.name] == value else None
            new = dict(binding)
            new[pattern.name] = value
            return new
        if isinstance(pattern, IriTerm):
            return binding if isinstance(value, IriTerm) and str(pattern) == str(value) else None
        if isinstance(value, IriTerm):
            return None
        return binding if pattern == value else None

    def unify_subject(pattern: PatternTerm, subject: str, binding):
        return unify(pattern, IriTerm(subject), binding)

    solutions: list[dict[str, Term]] = [{}]
    for s, p, o in q.patterns:
        next_solutions = []
        for binding in solutions:
            for t in triples:
                b1 = unify_subject(s, t.subject, binding)
                if b1 is None:
                    continue
                b2 = unify_subject(p, t.predicate, b1)
                if b2 is None:
                    continue
                b3 = unify(o, t.object, b2)
                if b3 is not None:
                    next_solutions.append(b3)
        solutions = next_solutions
        if not solutions:
            break
    out = []
    for binding in solutions:
        if all(_apply_filter(f, binding) for f in q.filters):
            out.append(binding)
    return out


def _apply_filter(f: FilterExpr, binding: dict[str, Term]) -> bool:
    if f.var not in binding:
        return False
    value = binding[f.var]
    if isinstance(value, IriTerm):
        value = str(value)
        other = str(f.value) if isinstance(f.value, str) else f.value
    else:
        other = f.value
    try:
        if f.op == "=":
            return value == other
        if f.op == "!=":
            return value != other
        if f.op == "<":
            return value < other
        if f.op == "<=":
            return value <= other
        if f.op == ">":
            return value > other
        return value >= other
    except TypeError:
        return False
