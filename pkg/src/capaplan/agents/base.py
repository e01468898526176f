"""Shared agent machinery: tool-scoped reasoning loops over a provider.

Each agent is a function that builds a request from the session's state
slice, iterates provider tool calls against its scoped tool set, and
returns a schema-validated result together with the complete tool-call
trace. Tool scoping is structural: an agent only ever receives the tools
its role permits, so the trace invariants hold by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources as importlib_resources
from typing import Any, Callable, Mapping

from ..llm import (
    FinalAnswer,
    LlmRequest,
    SchemaViolationError,
    ToolCall,
    ToolDecl,
    complete,
)
from ..model import IriTerm, format_literal
from ..store import GraphStore

MAX_TOOL_CALLS = 8


class AgentError(Exception):
    pass


class GroundingError(AgentError):
    """An agent payload stated a fact that no tool result supports."""


@dataclass(frozen=True)
class ToolCallRecord:
    name: str
    arguments: Mapping[str, Any]
    result: Any


@dataclass(frozen=True)
class AgentResult:
    agent: str
    payload: Mapping[str, Any]
    trace: tuple[ToolCallRecord, ...]


def load_prompt(name: str) -> str:
    pkg = importlib_resources.files("capaplan.resources")
    return (pkg / f"{name}_prompt.txt").read_text(encoding="utf-8")


def load_schema(name: str) -> dict:
    pkg = importlib_resources.files("capaplan.resources")
    return json.loads((pkg / f"{name}_schema.json").read_text(encoding="utf-8"))


def _row_to_json(row: tuple) -> list:
    out = []
    for value in row:
        if isinstance(value, IriTerm):
            out.append(str(value))
        elif value is None:
            out.append(None)
        elif isinstance(value, (bool, int, str)):
            out.append(value)
        else:
            out.append(format_literal(value))
    return out


QUERY_TOOLS = (
    ToolDecl(
        "select",
        "Run a SELECT query against the capability knowledge graph.",
        {
            "type": "object",
            "properties": {"query": {"type": "string"}},
            "required": ["query"],
        },
    ),
    ToolDecl(
        "ask",
        "Run an ASK query against the capability knowledge graph.",
        {
            "type": "object",
            "properties": {"query": {"type": "string"}},
            "required": ["query"],
        },
    ),
)


def make_query_tools(store: GraphStore) -> dict[str, Callable[[Mapping[str, Any]], Any]]:
    """Read-only graph tools shared by the retrieval-flavored agents."""

    def select(args: Mapping[str, Any]):
        rows = store.query(args["query"])
        return [_row_to_json(row) for row in rows]

    def ask(args: Mapping[str, Any]):
        return store.query(args["query"])

    return {"select": select, "ask": ask}


def run_agent(
    name: str,
    provider,
    messages: tuple[tuple[str, str], ...],
    tools: Mapping[str, Callable[[Mapping[str, Any]], Any]],
    tool_decls: tuple[ToolDecl, ...],
) -> AgentResult:
    """Drive the tool-call loop until the provider emits a final payload."""
    prompt = load_prompt(name)
    schema = load_schema(name)
    trace: list[ToolCallRecord] = []
    history = list(messages)
    for _ in range(MAX_TOOL_CALLS + 1):
        request = LlmRequest(
            agent=name,
            system_prompt=prompt,
            messages=tuple(history),
            tools=tool_decls,
            output_schema=schema,
        )
        response = complete(provider, request)
        if isinstance(response, FinalAnswer):
            return AgentResult(name, response.payload, tuple(trace))
        assert isinstance(response, ToolCall)
        if response.name not in tools:
            raise AgentError(f"agent {name} called unavailable tool {response.name!r}")
        try:
            result = tools[response.name](response.arguments)
        except Exception as exc:  # noqa: BLE001 - failures belong in the trace
            result = {"error": str(exc)}
        trace.append(ToolCallRecord(response.name, dict(response.arguments), result))
        history.append(("tool", json.dumps({"tool": response.name, "result": result}, default=str)))
    raise AgentError(f"agent {name} exceeded {MAX_TOOL_CALLS} tool calls")
