"""Typed capability domain: resources, capabilities, properties, constraints.

Numeric literals are held as exact values (``int`` or ``fractions.Fraction``)
so that comparisons inside the model layer never suffer float rounding.
All values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import ModelValidationError

Literal = Union[bool, int, Fraction, str]

DATATYPES = ("real", "integer", "boolean", "string")
ROLES = ("input", "output")
SUBJECTS = ("product", "information")
CAPABILITY_KINDS = ("provided", "required")


def literal_matches(value: Literal, datatype: str) -> bool:
    """Whether a literal is a legal constant for the given datatype."""
    if datatype == "boolean":
        return isinstance(value, bool)
    if datatype == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if datatype == "real":
        return isinstance(value, (int, Fraction)) and not isinstance(value, bool)
    if datatype == "string":
        return isinstance(value, str)
    return False


def format_literal(value: Literal) -> str:
    """Canonical text form of a literal (exact; decimals when finite)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return format_fraction(value)
    return str(value)


def format_fraction(value: Fraction) -> str:
    """Exact decimal string when the fraction terminates, else ``p/q``."""
    num, den = value.numerator, value.denominator
    if den == 1:
        return str(num)
    d = den
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{num}/{den}"
    shift = max(twos, fives)
    scaled = abs(num) * 10**shift // den
    digits = str(scaled).rjust(shift + 1, "0")
    sign = "-" if num < 0 else ""
    return f"{sign}{digits[:-shift]}.{digits[-shift:]}" if shift else f"{sign}{digits}"


def parse_numeric(text: str) -> int | Fraction:
    """Parse an exact numeric literal: integer, decimal, or ``p/q``."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    if "." in text or "e" in text or "E" in text:
        return Fraction(text)
    return int(text)


@dataclass(frozen=True)
class Iri:
    """Globally unique identifier for a graph entity."""

    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise ModelValidationError(["IRI must be non-empty"])

    def __str__(self) -> str:
        return self.value


# --- constraint expression tree ------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: Literal


@dataclass(frozen=True)
class PropRef:
    iri: Iri


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


CMP_OPS = ("le", "lt", "ge", "gt", "eq", "ne")


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "Expr"
    right: "Expr"

    def __post_init__(self) -> None:
        if self.op not in CMP_OPS:
            raise ModelValidationError([f"unknown comparison operator: {self.op}"])


@dataclass(frozen=True)
class And:
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class Not:
    operand: "Expr"


Expr = Union[Lit, PropRef, Neg, Add, Sub, Mul, Cmp, And, Or, Not]

ConstraintExpr = Expr


def prop_refs(expr: Expr) -> list[Iri]:
    """All property references in an expression, in first-occurrence order."""
    out: list[Iri] = []

    def walk(e: Expr) -> None:
        if isinstance(e, PropRef):
            if e.iri not in out:
                out.append(e.iri)
        elif isinstance(e, (Neg, Not)):
            walk(e.operand)
        elif isinstance(e, (Add, Sub, Mul, Cmp)):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, (And, Or)):
            for item in e.items:
                walk(item)

    walk(expr)
    return out


# --- declarations ---------------------------------------------------------


@dataclass(frozen=True)
class PropertyDecl:
    iri: Iri
    name: str
    datatype: str
    role: str
    subject: str
    value: Literal | None = None  # None means unbound variable
    unit: str | None = None

    def __post_init__(self) -> None:
        # normalize real constants to Fraction so round-trips compare equal
        if (
            self.datatype == "real"
            and isinstance(self.value, int)
            and not isinstance(self.value, bool)
        ):
            object.__setattr__(self, "value", Fraction(self.value))
        problems = []
        if self.datatype not in DATATYPES:
            problems.append(f"{self.iri}: unknown datatype {self.datatype!r}")
        if self.role not in ROLES:
            problems.append(f"{self.iri}: unknown role {self.role!r}")
        if self.subject not in SUBJECTS:
            problems.append(f"{self.iri}: unknown subject {self.subject!r}")
        if self.value is not None and not literal_matches(self.value, self.datatype):
            problems.append(
                f"{self.iri}: constant {format_literal(self.value)!r} does not match datatype {self.datatype}"
            )
        if self.unit is not None and self.datatype not in ("real", "integer"):
            problems.append(f"{self.iri}: unit only allowed on numeric properties")
        if problems:
            raise ModelValidationError(problems)


@dataclass(frozen=True)
class Capability:
    iri: Iri
    kind: str
    description: str
    resource: Iri | None
    inputs: tuple[PropertyDecl, ...]
    outputs: tuple[PropertyDecl, ...]
    constraints: tuple[ConstraintExpr, ...]

    @property
    def properties(self) -> tuple[PropertyDecl, ...]:
        return self.inputs + self.outputs

    def property_by_iri(self, iri: Iri) -> PropertyDecl | None:
        for p in self.properties:
            if p.iri == iri:
                return p
        return None

    def constraint_ids(self) -> list[tuple[Iri, int]]:
        """Stable ordinal-based constraint identifiers."""
        return [(self.iri, i) for i in range(len(self.constraints))]


@dataclass(frozen=True)
class Resource:
    iri: Iri
    name: str


@dataclass(frozen=True)
class CapabilityModel:
    resources: tuple[Resource, ...] = ()
    capabilities: tuple[Capability, ...] = ()

    def capability(self, iri: Iri | str) -> Capability:
        key = iri if isinstance(iri, Iri) else Iri(iri)
        for c in self.capabilities:
            if c.iri == key:
                return c
        raise KeyError(str(iri))

    def provided(self) -> tuple[Capability, ...]:
        return tuple(c for c in self.capabilities if c.kind == "provided")

    def required(self) -> tuple[Capability, ...]:
        return tuple(c for c in self.capabilities if c.kind == "required")


def model(resources=(), capabilities=()) -> CapabilityModel:
    """Build and validate a model in one call."""
    m = CapabilityModel(tuple(resources), tuple(capabilities))
    validate_model(m)
    return m


def canonical_model(m: CapabilityModel) -> CapabilityModel:
    """Ordering-normalized copy: entities sorted by IRI (constraints keep ordinals)."""
    from dataclasses import replace

    return CapabilityModel(
        tuple(sorted(m.resources, key=lambda r: r.iri.value)),
        tuple(
            replace(
                c,
                inputs=tuple(sorted(c.inputs, key=lambda p: p.iri.value)),
                outputs=tuple(sorted(c.outputs, key=lambda p: p.iri.value)),
            )
            for c in sorted(m.capabilities, key=lambda c: c.iri.value)
        ),
    )


def validate_model(m: CapabilityModel) -> None:
    """Check all model invariants; raises ModelValidationError listing violations."""
    from .typecheck import typecheck_constraint  # local import to avoid a cycle

    problems: list[str] = []
    seen: set[str] = set()
    for r in m.resources:
        if r.iri.value in seen:
            problems.append(f"duplicate IRI: {r.iri}")
        seen.add(r.iri.value)
    resource_iris = {r.iri for r in m.resources}
    for c in m.capabilities:
        if c.iri.value in seen:
            problems.append(f"duplicate IRI: {c.iri}")
        seen.add(c.iri.value)
        if c.kind not in CAPABILITY_KINDS:
            problems.append(f"{c.iri}: unknown kind {c.kind!r}")
        if c.kind == "provided":
            if c.resource is None:
                problems.append(f"{c.iri}: provided capability must name a resource")
            elif c.resource not in resource_iris:
                problems.append(f"{c.iri}: unknown resource {c.resource}")
        if c.kind == "required" and c.resource is not None:
            problems.append(f"{c.iri}: required capability must not name a resource")
        names: set[tuple[str, str]] = set()
        for p in c.inputs:
            if p.role != "input":
                problems.append(f"{p.iri}: listed as input but role is {p.role}")
        for p in c.outputs:
            if p.role != "output":
                problems.append(f"{p.iri}: listed as output but role is {p.role}")
        for p in c.properties:
            if p.iri.value in seen:
                problems.append(f"duplicate IRI: {p.iri}")
            seen.add(p.iri.value)
            if (p.name, p.role) in names:
                problems.append(f"{c.iri}: duplicate {p.role} property name {p.name!r}")
            names.add((p.name, p.role))
        scope = {p.iri: p for p in c.properties}
        for i, expr in enumerate(c.constraints):
            try:
                typecheck_constraint(expr, scope)
            except Exception as exc:  # noqa: BLE001 - collect all violations
                problems.append(f"{c.iri} constraint {i}: {exc}")
    if problems:
        raise ModelValidationError(problems)
