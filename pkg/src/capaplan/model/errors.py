"""Errors raised by the capability model layer."""


class ModelError(Exception):
    """Base class for capability-model failures."""


class ModelSyntaxError(ModelError):
    """Malformed model document.

    Carries a best-effort position (line/column or character offset)
    when the underlying parser provides one.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message)


class ModelValidationError(ModelError):
    """A structurally well-formed document violated a model invariant."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class TypecheckError(ModelError):
    """A constraint expression failed to type-check."""


class EvaluationError(ModelError):
    """A constraint expression could not be evaluated under the given binding."""
