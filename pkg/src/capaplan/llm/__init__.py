"""Provider-agnostic structured chat completion with tool calling."""

from .provider import (
    FinalAnswer,
    HttpProvider,
    LlmRequest,
    LlmResponse,
    ProviderError,
    SchemaViolationError,
    ScriptEntry,
    ScriptExhaustedError,
    ScriptedProvider,
    ToolCall,
    ToolDecl,
    ValidationVerdict,
    complete,
    load_script,
    validate_output,
)

__all__ = [
    "FinalAnswer", "HttpProvider", "LlmRequest", "LlmResponse", "ProviderError",
    "SchemaViolationError", "ScriptEntry", "ScriptExhaustedError",
    "ScriptedProvider", "ToolCall", "ToolDecl", "ValidationVerdict", "complete",
    "load_script", "validate_output",
]
