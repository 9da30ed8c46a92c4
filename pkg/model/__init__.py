from .storage_models import (
    ByteExtent,
    IndexEntry,
    ValidationFinding,
    ValidationReport,
)
from .arc_models import (
    ArcRecordHeader,
    ArcVersionBlock,
    ArcSummary,
)
from .tape_models import (
    TapeAdmin,
    TapeRecordAdmin,
    TapeRecord,
    TapeSummary,
    ScannedRecord,
    TapeScan,
)
from .ingest_models import (
    SubmissionDatastream,
    SubmissionObject,
    DatastreamRef,
    WrapperDocument,
    IngestConfig,
    IngestedObject,
    IngestReport,
)
from .locator_models import (
    VersionEntry,
    ResolvedVersion,
)

__all__ = [
    "ByteExtent",
    "IndexEntry",
    "ValidationFinding",
    "ValidationReport",
    "ArcRecordHeader",
    "ArcVersionBlock",
    "ArcSummary",
    "TapeAdmin",
    "TapeRecordAdmin",
    "TapeRecord",
    "TapeSummary",
    "ScannedRecord",
    "TapeScan",
    "SubmissionDatastream",
    "SubmissionObject",
    "DatastreamRef",
    "WrapperDocument",
    "IngestConfig",
    "IngestedObject",
    "IngestReport",
    "VersionEntry",
    "ResolvedVersion",
]
