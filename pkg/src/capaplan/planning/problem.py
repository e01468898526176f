"""Planning problem, plan, and diagnosis types with assertion-label origins."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Union

from ..model import CapabilityModel, Iri, Literal


class LabelError(Exception):
    """An assertion label could not be parsed back to its origin."""


@dataclass(frozen=True)
class PlanningProblem:
    goal: Iri
    domain: CapabilityModel
    max_horizon: int = 5
    # optional finite value grids: property iri -> allowed literals
    grids: Mapping[str, tuple[Literal, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.max_horizon < 1:
            raise ValueError("max_horizon must be at least 1")
        goal_cap = self.domain.capability(self.goal)
        if goal_cap.kind != "required":
            raise ValueError(f"goal {self.goal} is not a required capability")


@dataclass(frozen=True)
class PlanStep:
    index: int
    capability: Iri
    assignments: tuple[tuple[Iri, Literal], ...]

    def assignment_map(self) -> dict[Iri, Literal]:
        return dict(self.assignments)


@dataclass(frozen=True)
class Plan:
    steps: tuple[PlanStep, ...]
    # decoded pre-plan state keyed by product property name; used for replay
    initial_state: tuple[tuple[str, Literal], ...] = ()

    @property
    def goal_already_satisfied(self) -> bool:
        return not self.steps


# --- assertion label origins ---------------------------------------------


@dataclass(frozen=True)
class CapabilityConstraintOrigin:
    capability: Iri
    ordinal: int
    step: int


@dataclass(frozen=True)
class GoalConstraintOrigin:
    ordinal: int


@dataclass(frozen=True)
class FrameOrigin:
    property_name: str
    step: int


@dataclass(frozen=True)
class StructuralOrigin:
    step: int


Origin = Union[CapabilityConstraintOrigin, GoalConstraintOrigin, FrameOrigin, StructuralOrigin]

_LABEL_RE = re.compile(
    r"^(?:c__(?P<cap>[0-9a-f]{8})__(?P<cord>\d+)__s(?P<cstep>\d+)"
    r"|g__(?P<gord>\d+)"
    r"|f__(?P<prop>[0-9a-f]{8})__s(?P<fstep>\d+)"
    r"|x__s(?P<xstep>\d+))$"
)


@dataclass(frozen=True)
class AssertionLabel:
    """A solver assertion name whose origin is recoverable from the string."""

    label: str

    @staticmethod
    def for_capability(cap_hash: str, ordinal: int, step: int) -> "AssertionLabel":
        return AssertionLabel(f"c__{cap_hash}__{ordinal}__s{step}")

    @staticmethod
    def for_goal(ordinal: int) -> "AssertionLabel":
        return AssertionLabel(f"g__{ordinal}")

    @staticmethod
    def for_frame(prop_hash: str, step: int) -> "AssertionLabel":
        return AssertionLabel(f"f__{prop_hash}__s{step}")

    @staticmethod
    def for_structure(step: int) -> "AssertionLabel":
        return AssertionLabel(f"x__s{step}")

    def parse(
        self,
        cap_hash_to_iri: Mapping[str, Iri],
        prop_hash_to_name: Mapping[str, str],
    ) -> Origin:
        m = _LABEL_RE.match(self.label)
        if m is None:
            raise LabelError(f"unparseable assertion label: {self.label!r}")
        if m.group("cap") is not None:
            cap_hash = m.group("cap")
            if cap_hash not in cap_hash_to_iri:
                raise LabelError(f"label names unknown capability hash: {self.label!r}")
            return CapabilityConstraintOrigin(
                cap_hash_to_iri[cap_hash], int(m.group("cord")), int(m.group("cstep"))
            )
        if m.group("gord") is not None:
            return GoalConstraintOrigin(int(m.group("gord")))
        if m.group("prop") is not None:
            prop_hash = m.group("prop")
            if prop_hash not in prop_hash_to_name:
                raise LabelError(f"label names unknown property hash: {self.label!r}")
            return FrameOrigin(prop_hash_to_name[prop_hash], int(m.group("fstep")))
        return StructuralOrigin(int(m.group("xstep")))


@dataclass(frozen=True)
class UnsatDiagnosis:
    core: tuple[str, ...]  # sorted label strings
    origins: tuple[Origin, ...]
    horizon_tried: int

    def __post_init__(self) -> None:
        if not self.core:
            raise ValueError("an unsat diagnosis requires a non-empty core")

    def by_capability(self) -> dict[Iri, list[CapabilityConstraintOrigin]]:
        grouped: dict[Iri, list[CapabilityConstraintOrigin]] = {}
        for origin in self.origins:
            if isinstance(origin, CapabilityConstraintOrigin):
                grouped.setdefault(origin.capability, []).append(origin)
        return grouped


@dataclass(frozen=True)
class SatResult:
    plan: Plan


@dataclass(frozen=True)
class UnsatResult:
    diagnosis: UnsatDiagnosis


PlanningResult = Union[SatResult, UnsatResult]
