"""Domain error hierarchy.

Every error carries a stable machine-readable ``code`` so the CLI and the
HTTP service can map failures without string matching. Domain errors never
escape as bare exceptions through the adapters: the CLI turns them into a
single JSON object on stderr (exit 1), the service into a JSON body with a
400/404/409 status.
"""

from __future__ import annotations

from typing import Any


class DomainError(Exception):
    """Base class for all expected, caller-visible failures."""

    code = "DomainError"

    def __init__(self, message: str, detail: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}

    def to_dict(self) -> dict[str, Any]:
        return {"error": self.code, "message": self.message, "detail": self.detail}


class ValidationFailed(DomainError):
    code = "ValidationFailed"


class EmptyName(ValidationFailed):
    code = "EmptyName"


class NotFound(DomainError):
    code = "NotFound"


class CaseClosed(DomainError):
    code = "CaseClosed"


class DanglingEvidenceRef(DomainError):
    code = "DanglingEvidenceRef"


class SelfMove(DomainError):
    code = "SelfMove"


class TemporalViolation(DomainError):
    code = "TemporalViolation"


class UseRecordMove(DomainError):
    code = "UseRecordMove"


class InvalidState(DomainError):
    code = "InvalidState"


class NotProven(DomainError):
    code = "NotProven"


class Mismatch(DomainError):
    code = "Mismatch"


class ClosureBlocked(DomainError):
    code = "ClosureBlocked"


class BlobMissing(DomainError):
    code = "BlobMissing"


class SigningError(DomainError):
    code = "SigningError"


class StorageError(DomainError):
    code = "StorageError"


class UnknownEventKind(DomainError):
    code = "UnknownEventKind"


class JournalTampered(DomainError):
    code = "JournalTampered"


class NoGenesis(DomainError):
    code = "NoGenesis"


class UnsupportedSchema(DomainError):
    code = "UnsupportedSchema"


class UnsupportedFormat(DomainError):
    code = "UnsupportedFormat"


class ManifestTampered(DomainError):
    code = "ManifestTampered"


class IoError(DomainError):
    code = "IoError"


# Errors that signal a conflict with current state rather than bad input.
CONFLICT_CODES = {"InvalidState", "ClosureBlocked", "CaseClosed", "JournalTampered"}
