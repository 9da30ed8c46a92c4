from .vocabulary import (
    NS,
    PAYLOAD_DIGEST,
    serialize_tape_head,
    serialize_record,
)
from .writer import (
    TapeWriter,
    check_payload,
    create_tape,
    seal_tape,
)
from .reader import (
    scan_tape,
    read_tape_admin,
    read_record_at,
    parse_record_container,
)
from .validator import validate_tape

__all__ = [
    "NS",
    "PAYLOAD_DIGEST",
    "serialize_tape_head",
    "serialize_record",
    "TapeWriter",
    "check_payload",
    "create_tape",
    "seal_tape",
    "scan_tape",
    "read_tape_admin",
    "read_record_at",
    "parse_record_container",
    "validate_tape",
]
