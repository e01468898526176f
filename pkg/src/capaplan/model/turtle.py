"""Turtle-subset reader/writer for capability models.

Supported syntax: ``@prefix`` declarations, simple triples with ``;`` and
``,`` continuations, ``a`` for rdf:type, ``<iri>`` and prefixed names,
string/integer/decimal/boolean literals, and ``"p/q"^^cap:rational`` for
non-terminating reals. Triples with predicates outside the fixed
vocabulary are rejected into a warning list rather than failing the parse.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ModelSyntaxError
from .projection import (
    KNOWN_PREDICATES,
    RDF_TYPE,
    VOCAB,
    IriTerm,
    Term,
    Triple,
    model_to_triples,
    triples_to_model,
)
from .types import CapabilityModel, format_fraction, parse_numeric

RATIONAL_TYPE = VOCAB + "rational"

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<typed>\^\^)
  | (?P<prefixdecl>@prefix)
  | (?P<number>[+-]?\d+(?:\.\d+)?)
  | (?P<punct>[;,.])
  | (?P<pname>[A-Za-z_][\w.-]*)?:(?P<local>[\w.#/-]*)
  | (?P<bare>[A-Za-z_][\w-]*)
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    line = 1
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line=line)
        chunk = m.group(0)
        line += chunk.count("\n")
        if m.lastgroup != "ws" and not m.group("ws"):
            if m.group("local") is not None and m.group("iri") is None:
                tokens.append(("pname", (m.group("pname") or "", m.group("local")), line))
            else:
                tokens.append((m.lastgroup, chunk, line))
        pos = m.end()
    tokens.append(("eof", "", line))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []
        self.warnings: list[str] = []

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_punct(self, ch: str) -> None:
        kind, value, line = self.next()
        if kind != "punct" or value != ch:
            raise ModelSyntaxError(f"expected {ch!r}, got {value!r}", line=line)

    def parse(self) -> None:
        while self.peek()[0] != "eof":
            if self.peek()[0] == "prefixdecl":
                self.next()
                kind, value, line = self.next()
                if kind != "pname":
                    raise ModelSyntaxError("expected prefix name after @prefix", line=line)
                prefix = value[0]
                kind, iri, line = self.next()
                if kind != "iri":
                    raise ModelSyntaxError("expected IRI in @prefix", line=line)
                self.prefixes[prefix] = iri[1:-1]
                self.expect_punct(".")
            else:
                self.statement()

    def term_iri(self) -> str:
        kind, value, line = self.next()
        if kind == "iri":
            return value[1:-1]
        if kind == "pname":
            prefix, local = value
            if prefix not in self.prefixes:
                raise ModelSyntaxError(f"unknown prefix {prefix!r}", line=line)
            return self.prefixes[prefix] + local
        raise ModelSyntaxError(f"expected IRI, got {value!r}", line=line)

    def predicate(self) -> str:
        kind, value, _line = self.peek()
        if kind == "bare" and value == "a":
            self.next()
            return RDF_TYPE
        return self.term_iri()

    def object_term(self) -> Term:
        kind, value, line = self.peek()
        if kind == "string":
            self.next()
            raw = _unescape(value[1:-1])
            if self.peek()[0] == "typed":
                self.next()
                type_iri = self.term_iri()
                if type_iri == RATIONAL_TYPE:
                    return parse_numeric(raw)
                return raw
            return raw
        if kind == "number":
            self.next()
            if "." in value:
                return Fraction(value)
            return int(value)
        if kind == "bare" and value in ("true", "false"):
            self.next()
            return value == "true"
        return IriTerm(self.term_iri())

    def statement(self) -> None:
        subject = self.term_iri()
        while True:
            pred = self.predicate()
            while True:
                obj = self.object_term()
                if pred in KNOWN_PREDICATES:
                    self.triples.append(Triple(subject, pred, obj))
                else:
                    self.warnings.append(f"unknown predicate rejected: <{pred}>")
                kind, value, _ = self.peek()
                if kind == "punct" and value == ",":
                    self.next()
                    continue
                break
            kind, value, _ = self.peek()
            if kind == "punct" and value == ";":
                self.next()
                # tolerate trailing ';' before '.'
                if self.peek()[0] == "punct" and self.peek()[1] == ".":
                    break
                continue
            break
        self.expect_punct(".")


def _unescape(raw: str) -> str:
    return (
        raw.replace("\\\\", "\x00")
        .replace('\\"', '"')
        .replace("\\n", "\n")
        .replace("\\t", "\t")
        .replace("\x00", "\\")
    )


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


def parse_turtle(text: str) -> tuple[list[Triple], list[str]]:
    parser = _Parser(text)
    parser.parse()
    return parser.triples, parser.warnings


def parse_turtle_model(text: str) -> tuple[CapabilityModel, list[str]]:
    triples, warnings = parse_turtle(text)
    return triples_to_model(triples), warnings


def _format_term(term: Term) -> str:
    if isinstance(term, IriTerm):
        if term.startswith(VOCAB):
            return "cap:" + term[len(VOCAB):]
        return f"<{term}>"
    if isinstance(term, bool):
        return "true" if term else "false"
    if isinstance(term, Fraction):
        text = format_fraction(term)
        if "/" in text:
            return f'"{text}"^^cap:rational'
        return text
    if isinstance(term, int):
        return str(term)
    return f'"{_escape(term)}"'


def serialize_turtle(triples: list[Triple]) -> str:
    lines = [f"@prefix cap: <{VOCAB}> .", ""]
    by_subject: dict[str, list[Triple]] = {}
    order: list[str] = []
    for t in triples:
        if t.subject not in by_subject:
            order.append(t.subject)
        by_subject.setdefault(t.subject, []).append(t)
    for subject in order:
        group = by_subject[subject]
        parts = []
        for t in group:
            pred = "a" if t.predicate == RDF_TYPE else _format_term(IriTerm(t.predicate))
            parts.append(f"    {pred} {_format_term(t.object)}")
        lines.append(f"<{subject}>")
        lines.append(" ;\n".join(parts) + " .")
    return "\n".join(lines) + "\n"


def serialize_turtle_model(m: CapabilityModel) -> str:
    return serialize_turtle(model_to_triples(m))
