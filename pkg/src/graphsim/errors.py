"""Exception hierarchy shared by the graph, sandbox and service layers.

Every error carries a stable ``code`` so it can be rendered into the
error-shaped results that the sandbox logs and replays.
"""

from __future__ import annotations

from typing import Any


class GraphSimError(Exception):
    code = "error"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_result(self) -> dict[str, Any]:
        error: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.details:
            error["details"] = self.details
        return {"status": "error", "error": error}


class InvalidArgument(GraphSimError):
    code = "invalid_argument"


class ValidationError(InvalidArgument):
    """A graph document failed structural validation."""

    def __init__(self, violations: list[str]) -> None:
        super().__init__(
            f"{len(violations)} violation(s): " + "; ".join(violations),
            violations=list(violations),
        )
        self.violations = list(violations)


class NotFound(GraphSimError):
    code = "not_found"


class Conflict(GraphSimError):
    code = "conflict"


class SessionNotFound(NotFound):
    code = "session_not_found"


class UnknownOperation(GraphSimError):
    code = "unknown_operation"
