"""Exception hierarchy shared by every consentkit module."""

from __future__ import annotations


class ConsentKitError(Exception):
    """Base class for all consentkit errors."""


# -- vocabulary / registry -------------------------------------------------

class VocabularyLoadError(ConsentKitError):
    """A vocabulary or registry document failed validation."""


class CycleError(VocabularyLoadError):
    """The parent relation contains a cycle."""

    def __init__(self, concept_id: str):
        self.concept_id = concept_id
        super().__init__(f"parent relation contains a cycle through concept {concept_id!r}")


class DanglingParentError(VocabularyLoadError):
    def __init__(self, concept_id: str, parent_id: str):
        self.concept_id = concept_id
        self.parent_id = parent_id
        super().__init__(f"concept {concept_id!r} references unknown parent {parent_id!r}")


class DuplicateIdError(VocabularyLoadError):
    def __init__(self, concept_id: str):
        self.concept_id = concept_id
        super().__init__(f"duplicate concept id {concept_id!r}")


class EmptyVocabularyError(ConsentKitError):
    """A codebook was requested for a vocabulary with no concepts."""


class UnknownVocabularyError(ConsentKitError):
    def __init__(self, registry_id: int):
        self.registry_id = registry_id
        super().__init__(f"vocabulary id {registry_id} is not registered")


class UnknownConceptError(ConsentKitError):
    def __init__(self, concept_id: str, registry_id: int | None = None):
        self.concept_id = concept_id
        self.registry_id = registry_id
        where = f" in vocabulary {registry_id}" if registry_id is not None else ""
        super().__init__(f"unknown concept {concept_id!r}{where}")


# -- policy codec ----------------------------------------------------------

class PolicyCodecError(ConsentKitError):
    """Base class for bit-string encode/decode failures."""


class WidthMismatchError(PolicyCodecError):
    """A bitfield length does not match the vocabulary's concept count."""


class TruncatedError(PolicyCodecError):
    """The byte sequence ended before the declared fields were complete."""


class NonCanonicalError(PolicyCodecError):
    """The bytes decode, but not to the canonical form the encoder emits."""


class EmptyMaskError(PolicyCodecError):
    """strip_for_header requires the purposes field to be kept."""


class AlphabetError(PolicyCodecError):
    """Input contains characters outside the URL-safe base64 alphabet."""


# -- signal / transport ----------------------------------------------------

class TransportError(ConsentKitError):
    """An HTTP exchange failed (connection, timeout, non-2xx status)."""


class SchemaError(ConsentKitError):
    """A document violates its schema; names the offending field."""

    def __init__(self, field: str, message: str | None = None):
        self.field = field
        super().__init__(message or f"invalid or missing field {field!r}")


class DisjointnessError(ConsentKitError):
    """Decision signal lists consent/withdraw/object overlap."""


# -- dialogue generation ---------------------------------------------------

class DialogueError(ConsentKitError):
    """Base class for dialogue generation failures."""


class EmptyRequestSetError(DialogueError):
    """Dialogue generation needs at least one consent request."""


class UnknownRequestRefError(DialogueError):
    def __init__(self, request_id: str):
        self.request_id = request_id
        super().__init__(f"template references undeclared request {request_id!r}")


class TemplateSchemaError(DialogueError):
    """A notice template document is malformed."""


class MissingNoticeRefError(DialogueError):
    """Choices-only generation needs the controller's notice handle."""


class UnknownControlError(DialogueError):
    def __init__(self, control_id: str):
        self.control_id = control_id
        super().__init__(f"activation references unknown control {control_id!r}")


# -- markup ------------------------------------------------------------------

class NoDialogError(ConsentKitError):
    """The HTML document contains no dialog element."""
