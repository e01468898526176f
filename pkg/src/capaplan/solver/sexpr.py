"""Minimal SMT-LIB2 s-expression reader/writer.

Supports symbols, keywords, numerals, decimals, string literals, and
nested lists. The incremental reader yields complete top-level forms as
they become available on a stream, which lets the solver respond to
``(check-sat)`` before the rest of the session arrives.
"""

from __future__ import annotations

from fractions import Fraction
from typing import IO, Iterator, Union

SExpr = Union[str, int, Fraction, list]


class SExprError(Exception):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)


_DELIMS = "() ;\t\r\n\""


def tokenize(text: str) -> Iterator[tuple[str, int]]:
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c, i
            i += 1
        elif c == '"':
            j = i + 1
            out = []
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        out.append('"')
                        j += 2
                        continue
                    break
                out.append(text[j])
                j += 1
            else:
                raise SExprError("unterminated string literal", i)
            yield '"' + "".join(out), i
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in _DELIMS:
                j += 1
            yield text[i:j], i
            i = j


def _atom(token: str) -> SExpr:
    if token.startswith('"'):
        return token  # keep the quote marker; callers strip it
    try:
        return int(token)
    except ValueError:
        pass
    try:
        if "." in token:
            return Fraction(token)
    except ValueError:
        pass
    return token


def parse_all(text: str) -> list[SExpr]:
    """Parse every top-level form in a script."""
    stack: list[list] = []
    top: list[SExpr] = []
    for token, offset in tokenize(text):
        if token == "(":
            stack.append([])
        elif token == ")":
            if not stack:
                raise SExprError("unbalanced ')'", offset)
            done = stack.pop()
            (stack[-1] if stack else top).append(done)
        else:
            (stack[-1] if stack else top).append(_atom(token))
    if stack:
        raise SExprError("unbalanced '('")
    return top


def read_forms(stream: IO[str]) -> Iterator[SExpr]:
    """Incrementally read complete top-level forms from a text stream."""
    buffer = ""
    depth = 0
    start = 0
    in_string = False
    in_comment = False
    pos = 0
    while True:
        chunk = stream.readline()
        if chunk == "":
            rest = buffer[start:].strip()
            if rest:
                yield from parse_all(rest)
            return
        buffer += chunk
        while pos < len(buffer):
            c = buffer[pos]
            if in_comment:
                if c == "\n":
                    in_comment = False
            elif in_string:
                if c == '"':
                    in_string = False
            elif c == '"':
                in_string = True
            elif c == ";":
                in_comment = True
            elif c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
                if depth == 0:
                    form_text = buffer[start : pos + 1]
                    for form in parse_all(form_text):
                        yield form
                    start = pos + 1
            pos += 1
        if depth == 0 and start > 0:
            buffer = buffer[start:]
            pos -= start
            start = 0


def dumps(expr: SExpr) -> str:
    if isinstance(expr, list):
        return "(" + " ".join(dumps(e) for e in expr) + ")"
    if isinstance(expr, Fraction):
        from ..model import format_fraction

        return format_fraction(expr)
    if isinstance(expr, str) and expr.startswith('"'):
        body = expr[1:].replace('"', '""')
        return f'"{body}"'
    return str(expr)
