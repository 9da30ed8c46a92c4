from .writer import (
    ArcWriter,
    create_arc,
    check_media_type,
    record_size,
)
from .reader import (
    ArcEntry,
    parse_header_line,
    scan_arc,
    read_record,
    validate_arc,
)

__all__ = [
    "ArcWriter",
    "create_arc",
    "check_media_type",
    "record_size",
    "ArcEntry",
    "parse_header_line",
    "scan_arc",
    "read_record",
    "validate_arc",
]
