"""Domain error hierarchy shared across all modules.

Every error the HTTP layer can surface maps to exactly one (status, code)
pair; that table lives in api.py.
"""


class EcgAnnoError(Exception):
    """Base class for all domain errors raised by this package."""


# --- WFDB parsing / ingestion ---

class MalformedHeader(EcgAnnoError):
    pass


class UnsupportedFormat(EcgAnnoError):
    pass


class InconsistentHeader(EcgAnnoError):
    pass


class TruncatedSignalFile(EcgAnnoError):
    pass


class MissingSignalFile(EcgAnnoError):
    pass


class DuplicateRecordName(EcgAnnoError):
    pass


class NonPositiveGain(EcgAnnoError):
    pass


# --- signal analysis ---

class WindowOutOfRange(EcgAnnoError):
    pass


class UnknownLead(EcgAnnoError):
    pass


# --- storage ---

class Conflict(EcgAnnoError):
    pass


class IoFailure(EcgAnnoError):
    pass


class RangeOutOfBounds(EcgAnnoError):
    pass


class UnknownRecord(EcgAnnoError):
    pass


class AlreadyInitialized(EcgAnnoError):
    pass


class NotInitialized(EcgAnnoError):
    pass


class SchemaVersionMismatch(EcgAnnoError):
    pass


# --- auth ---

class NotAdmin(EcgAnnoError):
    pass


class InvalidCode(EcgAnnoError):
    pass


class CodeAlreadyUsed(EcgAnnoError):
    pass


class UsernameTaken(EcgAnnoError):
    pass


class WeakPassword(EcgAnnoError):
    pass


class InvalidCredentials(EcgAnnoError):
    pass


class InvalidOrExpiredSession(EcgAnnoError):
    pass


# --- annotation workflow ---

class NotAMember(EcgAnnoError):
    pass


class UnknownDataset(EcgAnnoError):
    pass


class UnknownUser(EcgAnnoError):
    pass


class UnknownLabelCode(EcgAnnoError):
    pass


class EmptyConfirmed(EcgAnnoError):
    pass


class AtBoundary(EcgAnnoError):
    pass


class NotOwnerNorExpert(EcgAnnoError):
    pass


class UnknownAnnotation(EcgAnnoError):
    pass


class NotAnExpert(EcgAnnoError):
    pass


class MissingOverrideLabels(EcgAnnoError):
    pass


class RevisionConflict(EcgAnnoError):
    pass


class StaleAnnotation(EcgAnnoError):
    """Revise or decision targeting an annotation that is no longer a head."""
