"""Exception types shared across the toolkit."""

from __future__ import annotations

from typing import Any


class TournamentError(ValueError):
    """Malformed tournament input. ``kind`` is a stable machine-readable tag."""

    def __init__(self, kind: str, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.kind = kind
        self.pair = pair


class VertexOutOfRange(TournamentError):
    def __init__(self, vertex: int, n: int):
        super().__init__("vertex-out-of-range", f"vertex {vertex} not in [0, {n})")
        self.vertex = vertex


class PreconditionError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class StageFailure(Exception):
    """A pipeline stage could not meet its postcondition.

    ``detail`` holds plain JSON-able data (needed vs achieved counts, rounds,
    witnesses). ``transcript`` is filled in by the driver.
    """

    def __init__(self, stage: str, reason: str, detail: dict[str, Any] | None = None):
        super().__init__(f"{stage}: {reason}")
        self.stage = stage
        self.reason = reason
        self.detail = dict(detail or {})
        self.transcript: list[dict[str, Any]] = []

    def to_dict(self) -> dict[str, Any]:
        return {
            "stage": self.stage,
            "reason": self.reason,
            "detail": self.detail,
            "transcript": self.transcript,
        }
