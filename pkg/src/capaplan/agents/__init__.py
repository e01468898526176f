"""Tool-scoped agents driving the capability-planning workflow."""

from .base import (
    AgentError,
    AgentResult,
    GroundingError,
    ToolCallRecord,
    load_prompt,
    load_schema,
)
from .core import (
    INTENTS,
    AdaptationProposal,
    ConflictNote,
    ProposalRejected,
    analyze_and_propose,
    apply_repair,
    expand_remove_capability,
    find_required_candidates,
    intent_violations,
    map_capabilities,
    plan_and_explain,
    retrieve_knowledge,
    route,
    simulate_mutations,
)

__all__ = [
    "AdaptationProposal", "AgentError", "AgentResult", "ConflictNote",
    "GroundingError", "INTENTS", "ProposalRejected", "ToolCallRecord",
    "analyze_and_propose", "apply_repair", "expand_remove_capability",
    "find_required_candidates", "intent_violations", "load_prompt",
    "load_schema", "map_capabilities", "plan_and_explain",
    "retrieve_knowledge", "route", "simulate_mutations",
]
