"""Exception types shared across the package.

Each error carries a short machine-readable ``code`` so the HTTP layer can
surface failures uniformly without string matching.
"""

from __future__ import annotations


class ProvenanceError(Exception):
    """Base class for all provlens errors."""

    code = "error"


class DatasetError(ProvenanceError):
    """Dataset could not be parsed or violates its invariants."""

    code = "bad_dataset"


class UnknownEntityError(ProvenanceError):
    """An attribute name or record id does not exist in the dataset."""

    code = "unknown_entity"


class StaleSeqError(ProvenanceError):
    """An event's sequence number is not strictly greater than all applied ones."""

    code = "stale_seq"


class InvalidModeError(ProvenanceError):
    """Operation not permitted in the session's current mode."""

    code = "invalid_mode"


class HashMismatchError(ProvenanceError):
    """Imported log header names a different dataset than the one loaded."""

    code = "hash_mismatch"


class BadSpecError(ProvenanceError):
    """Visualization spec failed validation."""

    code = "bad_spec"


class LogFormatError(ProvenanceError):
    """Exported log or snapshot bytes are corrupt."""

    code = "bad_log"
