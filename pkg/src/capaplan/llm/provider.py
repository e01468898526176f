"""Chat-completion providers: a deterministic scripted replayer and HTTP.

The scripted provider replays fixture responses so every end-to-end run is
a pure function of its inputs; the HTTP provider speaks the common
chat-completion wire shape and is selected only through configuration.
Structured outputs are validated against the request's JSON schema; a
violating response is retried once and then surfaced as an error.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from typing import Any, Mapping, Protocol, Sequence, Union

import jsonschema

ENV_API_KEY = "CAPAPLAN_LLM_API_KEY"


class ProviderError(Exception):
    pass


class ScriptExhaustedError(ProviderError):
    """No scripted entry matches the request: a test-configuration error."""


class SchemaViolationError(ProviderError):
    """The response payload failed schema validation twice."""


@dataclass(frozen=True)
class ToolDecl:
    name: str
    description: str
    argument_schema: Mapping[str, Any]


@dataclass(frozen=True)
class LlmRequest:
    agent: str
    system_prompt: str
    messages: tuple[tuple[str, str], ...]  # (role, content)
    tools: tuple[ToolDecl, ...] = ()
    output_schema: Mapping[str, Any] | None = None
    temperature: float = 0.0

    def last_user_message(self) -> str:
        for role, content in reversed(self.messages):
            if role == "user":
                return content
        return ""


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: Mapping[str, Any]


@dataclass(frozen=True)
class FinalAnswer:
    payload: Mapping[str, Any]


LlmResponse = Union[ToolCall, FinalAnswer]


@dataclass(frozen=True)
class ValidationVerdict:
    ok: bool
    path: str = ""
    message: str = ""


def validate_output(payload: Mapping[str, Any], schema: Mapping[str, Any]) -> ValidationVerdict:
    """Structural check of a payload; the verdict carries the first violation."""
    validator = jsonschema.Draft202012Validator(schema)
    for error in sorted(validator.iter_errors(payload), key=lambda e: list(e.absolute_path)):
        path = "/".join(str(p) for p in error.absolute_path)
        return ValidationVerdict(False, path, error.message)
    return ValidationVerdict(True)


class Provider(Protocol):
    def raw_complete(self, request: LlmRequest) -> LlmResponse: ...


@dataclass
class ScriptEntry:
    """One replayable unit: matcher plus the response sequence it yields."""

    agent: str
    match: str  # substring of the last user message; "" matches anything
    responses: tuple[LlmResponse, ...]
    repeat: bool = False
    cursor: int = field(default=0, compare=False)

    def matches(self, request: LlmRequest) -> bool:
        if self.agent != request.agent:
            return False
        if self.match and self.match not in request.last_user_message():
            return False
        return self.repeat or self.cursor < len(self.responses)

    def take(self) -> LlmResponse:
        response = self.responses[self.cursor % len(self.responses)]
        self.cursor += 1
        return response


class ScriptedProvider:
    """Replays fixture responses; entries are consumed first-match in order.

    One provider instance serves one session, so entry cursors double as the
    per-session consumption state. Thread-safe for the service's use.
    """

    def __init__(self, entries: Sequence[ScriptEntry]):
        self.entries = [
            ScriptEntry(e.agent, e.match, e.responses, e.repeat) for e in entries
        ]
        self._lock = threading.Lock()

    def raw_complete(self, request: LlmRequest) -> LlmResponse:
        with self._lock:
            for entry in self.entries:
                if entry.matches(request):
                    return entry.take()
        raise ScriptExhaustedError(
            f"no scripted response for agent {request.agent!r}, "
            f"message {request.last_user_message()!r}"
        )


def _response_from_json(doc: Mapping[str, Any]) -> LlmResponse:
    if "tool_call" in doc:
        call = doc["tool_call"]
        return ToolCall(call["name"], call.get("arguments", {}))
    if "final" in doc:
        return FinalAnswer(doc["final"])
    raise ProviderError(f"script response must be tool_call or final: {doc!r}")


def load_script(text: str) -> list[ScriptEntry]:
    """Parse a script document (JSON list of entry records)."""
    doc = json.loads(text)
    entries = []
    for record in doc:
        entries.append(
            ScriptEntry(
                agent=record["agent"],
                match=record.get("match", ""),
                responses=tuple(_response_from_json(r) for r in record["responses"]),
                repeat=record.get("repeat", False),
            )
        )
    return entries


class HttpProvider:
    """Chat-completion client for hosted models; never used in tests."""

    def __init__(self, base_url: str, model: str, api_key: str | None = None, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY, "")
        self.timeout = timeout

    def raw_complete(self, request: LlmRequest) -> LlmResponse:
        import httpx

        body: dict[str, Any] = {
            "model": self.model,
            "temperature": request.temperature,
            "messages": [{"role": "system", "content": request.system_prompt}]
            + [{"role": role, "content": content} for role, content in request.messages],
        }
        if request.tools:
            body["tools"] = [
                {
                    "type": "function",
                    "function": {
                        "name": t.name,
                        "description": t.description,
                        "parameters": t.argument_schema,
                    },
                }
                for t in request.tools
            ]
        if request.output_schema is not None:
            body["response_format"] = {
                "type": "json_schema",
                "json_schema": {"name": "output", "schema": request.output_schema},
            }
        try:
            reply = httpx.post(
                f"{self.base_url}/chat/completions",
                json=body,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
            reply.raise_for_status()
        except httpx.HTTPError as exc:
            raise ProviderError(f"transport failure: {exc}") from exc
        message = reply.json()["choices"][0]["message"]
        calls = message.get("tool_calls")
        if calls:
            fn = calls[0]["function"]
            return ToolCall(fn["name"], json.loads(fn["arguments"]))
        try:
            return FinalAnswer(json.loads(message["content"]))
        except (ValueError, TypeError) as exc:
            raise ProviderError(f"non-JSON final content: {exc}") from exc


def complete(provider: Provider, request: LlmRequest) -> LlmResponse:
    """One completion with schema enforcement: retry once, then surface."""
    response = provider.raw_complete(request)
    if isinstance(response, FinalAnswer) and request.output_schema is not None:
        verdict = validate_output(response.payload, request.output_schema)
        if not verdict.ok:
            response = provider.raw_complete(request)
            if not isinstance(response, FinalAnswer):
                return response
            verdict = validate_output(response.payload, request.output_schema)
            if not verdict.ok:
                raise SchemaViolationError(
                    f"payload invalid at {verdict.path or '<root>'}: {verdict.message}"
                )
    return response
