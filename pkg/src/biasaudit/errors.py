"""Exception hierarchy shared by all toolkit modules.

Every error that callers are expected to handle derives from
:class:`BiasAuditError`; the CLI maps subclasses onto exit codes
(validation failures -> 1, missing inputs -> 2).
"""

from __future__ import annotations


class BiasAuditError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(BiasAuditError):
    """Input data violates a documented invariant."""


class LexiconFormatError(ValidationError):
    """A lexicon/derivations file does not parse."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = f"{path or '<input>'}" + (f":{line}" if line is not None else "")
        super().__init__(f"{where}: {message}")


class DuplicateEntryError(ValidationError):
    """A (surface, language) pair occurs more than once."""

    def __init__(self, message: str, entries: list[tuple[str, str]] | None = None):
        self.entries = entries or []
        super().__init__(message)


class DanglingReferenceError(ValidationError):
    """A base_id or unit_id does not resolve."""


class SchemaError(ValidationError):
    """A JSONL record violates its wire schema."""

    def __init__(self, message: str, path: str | None = None, lines: list[int] | None = None):
        self.path = path
        self.lines = lines or []
        where = path or "<input>"
        detail = f" (lines {', '.join(map(str, self.lines))})" if self.lines else ""
        super().__init__(f"{where}: {message}{detail}")


class TranslationError(BiasAuditError):
    """The translation provider failed or the cache has a gap."""


class ExternalCountMissError(ValidationError):
    """external_counts mode has no entry for a requested key."""


class CoverageError(ValidationError):
    """Predictions do not cover every evaluated unit."""

    def __init__(self, message: str, missing: list[str] | None = None):
        self.missing = missing or []
        super().__init__(message)


class MissingInputError(BiasAuditError):
    """A required input file is absent (CLI exit code 2)."""
