"""Exception hierarchy shared by every module of the toolkit."""

from __future__ import annotations


class ProvAbsError(Exception):
    """Base class for domain errors (the CLI maps these to exit status 1)."""


class WorkflowSyntaxError(ProvAbsError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class DanglingReferenceError(ProvAbsError):
    pass


class DuplicateIdError(ProvAbsError):
    pass


class InvalidWorkflowError(ProvAbsError):
    """Raised when a parsed document violates a workflow invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid workflow: {lines}")


class CyclicWorkflowError(ProvAbsError):
    pass


class FlattenError(ProvAbsError):
    pass


class UnknownPortError(ProvAbsError):
    pass


class PolicyError(ProvAbsError):
    pass


class MappingError(ProvAbsError):
    """The view does not derive from the given workflow."""


class TraceError(ProvAbsError):
    pass
