"""
Exception hierarchy shared by every package of the repository.

Every error condition named by the storage, index, ingest and access layers
has its own class so callers can react precisely. All of them derive from
`RepositoryError`; value-shaped errors also derive from `ValueError`,
lookup failures from `KeyError` and I/O failures from `OSError`.
"""

from typing import List, Optional


class RepositoryError(Exception):
    """Base class for all repository errors."""


# ------------------------------------------------------------------------------
# Identifiers
# ------------------------------------------------------------------------------

class InvalidClassError(RepositoryError, ValueError):
    """Raised when an identifier class cannot be used for the requested operation."""


class MalformedIdentifierError(RepositoryError, ValueError):
    """
    Raised when a string does not match the repository identifier grammar.

    Attributes:
        value (str): The rejected input, as far as it could be decoded.
        position (int): Index of the first offending character.
    """

    def __init__(self, value: str, position: int, reason: str):
        self.value = value
        self.position = position
        self.reason = reason
        super().__init__(f"Malformed identifier {value!r} at position {position}: {reason}")


# ------------------------------------------------------------------------------
# Write-once files
# ------------------------------------------------------------------------------

class WriteOnceViolationError(RepositoryError):
    """Raised when a writer is asked to write into a non-empty or existing destination."""


class SealedError(RepositoryError):
    """Raised when a sealed writer is written to or sealed twice."""


class InvalidMediaTypeError(RepositoryError, ValueError):
    """Raised for media types that cannot be stored in an ARC header line."""


class PayloadError(RepositoryError, ValueError):
    """Raised when an XML payload is not a well-formed, self-contained element."""


class DuplicateKeyError(RepositoryError, ValueError):
    """Raised when a record or datastream identifier occurs twice in one file or index."""


# ------------------------------------------------------------------------------
# Reading
# ------------------------------------------------------------------------------

class ScanError(RepositoryError):
    """
    Raised when a sequential scan of a tape or ARC file fails.

    Attributes:
        offset (int): Byte offset at which the problem was detected.
        record_ordinal (Optional[int]): Ordinal of the record being scanned, if any.
    """

    def __init__(self, message: str, offset: int, record_ordinal: Optional[int] = None):
        self.offset = offset
        self.record_ordinal = record_ordinal
        where = f"byte {offset}"
        if record_ordinal is not None:
            where += f", record {record_ordinal}"
        super().__init__(f"{message} ({where})")


class OutOfBoundsError(RepositoryError, ValueError):
    """Raised when an extent reaches beyond the end of its target file."""


class CorruptRecordError(RepositoryError):
    """Raised when the bytes at an ARC extent are not one intact record."""


class CorruptExtentError(RepositoryError):
    """Raised when the bytes at a tape extent are not exactly one record container."""


# ------------------------------------------------------------------------------
# Indexes
# ------------------------------------------------------------------------------

class KeyNotFoundError(RepositoryError, KeyError):
    """Raised when an index holds no entry for the requested key."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "key not found"


class InvalidRangeError(RepositoryError, ValueError):
    """Raised when a datetime range has its lower bound after its upper bound."""


class StaleIndexError(RepositoryError):
    """Raised when an index file does not describe the current bytes of its target."""


# ------------------------------------------------------------------------------
# Ingest and locator
# ------------------------------------------------------------------------------

class InvalidBaseUrlError(RepositoryError, ValueError):
    """Raised when an OpenURL base is not an absolute HTTP(S) URL."""


class InvalidSubmissionError(RepositoryError, ValueError):
    """
    Raised when a batch is rejected before anything was written.

    Attributes:
        problems (List[str]): One human readable line per offending object.
    """

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("Batch rejected: " + "; ".join(self.problems))


class BatchLayoutError(RepositoryError, ValueError):
    """Raised when a batch directory does not follow the documented layout."""


class IngestIOError(RepositoryError, OSError):
    """Raised when writing a batch failed; no part of the batch became visible."""


class LocatorConflictError(RepositoryError, ValueError):
    """Raised when a version registration contradicts an existing one."""


class ConfigError(RepositoryError, EnvironmentError):
    """Raised when the configuration cannot be loaded or is inconsistent."""
