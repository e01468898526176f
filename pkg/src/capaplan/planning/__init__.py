"""Bounded-horizon planning: encoding, solving, core mapping, oracle."""

from .encode import EncodeError, EncodingIndex, encode
from .oracle import OracleBoundsError, oracle_solve
from .problem import (
    AssertionLabel,
    CapabilityConstraintOrigin,
    FrameOrigin,
    GoalConstraintOrigin,
    Plan,
    PlanningProblem,
    PlanningResult,
    PlanStep,
    SatResult,
    StructuralOrigin,
    UnsatDiagnosis,
    UnsatResult,
)
from .solve import (
    InternalSolverError,
    PlanningError,
    SolverTimeoutError,
    clear_solve_cache,
    conflict_pairs,
    decode,
    map_core,
    replay_plan,
    solve,
)

__all__ = [
    "AssertionLabel", "CapabilityConstraintOrigin", "EncodeError",
    "EncodingIndex", "FrameOrigin", "GoalConstraintOrigin", "InternalSolverError",
    "OracleBoundsError", "Plan", "PlanStep", "PlanningError", "PlanningProblem",
    "PlanningResult", "SatResult", "SolverTimeoutError", "StructuralOrigin",
    "UnsatDiagnosis", "UnsatResult", "clear_solve_cache", "conflict_pairs",
    "decode", "encode", "map_core", "oracle_solve", "replay_plan", "solve",
]
