"""
Validation of XMLtapes.

A tape is checked twice, by two unrelated parsers: defusedxml builds the full
document tree (well-formedness, vocabulary, record census) and the span
scanner walks the raw bytes (extents). The two must agree, every extent must
read back as the record the census found at that position, and stored payload
digests must match the payload bytes. A tape on disk is also compared with
the identifier index written when it was sealed, which pins every record's
identifier, datetime and extent.
"""

import os
from typing import List, Optional, Set
from xml.etree.ElementTree import Element, ParseError

from defusedxml import ElementTree as SafeElementTree
from defusedxml.common import DefusedXmlException

from db.index_file import compare_with_index
from lib.datestamp import DateFormat
from lib.errors import CorruptExtentError, PayloadError, ScanError
from lib.fsutil import bytes_digest, map_source
from lib.logger import logger
from lib.store_path import id_index_path
from model.storage_models import IndexEntry, ValidationReport

from .reader import read_record_at, scan_tape
from .vocabulary import (
    DATE,
    IDENTIFIER,
    NS,
    PAYLOAD_DIGEST,
    RECORD,
    RECORD_ADMIN,
    TAPE,
    TAPE_ADMIN,
    TAPE_ID,
    TAPE_RECORD,
)
from .writer import check_payload


def _qname(name: str) -> str:
    return f"{{{NS}}}{name}"


def _full_parse(source, report: ValidationReport) -> Optional[Element]:
    try:
        if isinstance(source, (str, os.PathLike)):
            return SafeElementTree.parse(source).getroot()
        with map_source(source) as buffer:
            return SafeElementTree.fromstring(bytes(buffer))
    except ParseError as exc:
        line, column = getattr(exc, "position", (None, None))
        report.add("not-well-formed", f"Not well-formed XML (line {line}, column {column}): {exc}")
    except DefusedXmlException as exc:
        report.add("not-well-formed", f"Forbidden XML construct: {exc!r}")
    return None


def _census(root: Element, report: ValidationReport) -> List[Optional[str]]:
    """
    Structural checks on the full tree; returns the identifier of every record container.
    """
    identifiers: List[Optional[str]] = []
    if root.tag != _qname(TAPE):
        report.add("bad-structure", f"Root element is {root.tag}, expected {_qname(TAPE)}")
        return identifiers
    children = list(root)
    if not children or children[0].tag != _qname(TAPE_ADMIN):
        report.add("bad-structure", "The first child of the tape must be tapeAdmin")
    elif children[0].find(_qname(TAPE_ID)) is None:
        report.add("missing-admin-element", "tapeAdmin has no tapeId")
    seen: Set[str] = set()
    for child in children[1:]:
        if child.tag != _qname(TAPE_RECORD):
            report.add("bad-structure", f"Unexpected element {child.tag} after tapeAdmin")
            continue
        ordinal = len(identifiers)
        admin = child.find(_qname(RECORD_ADMIN))
        identifier = admin.find(_qname(IDENTIFIER)) if admin is not None else None
        date = admin.find(_qname(DATE)) if admin is not None else None
        record = child.find(_qname(RECORD))
        if admin is None or identifier is None or date is None:
            missing = RECORD_ADMIN if admin is None else (IDENTIFIER if identifier is None else DATE)
            report.add("missing-admin-element", f"missing mandatory admin element {missing}", ordinal)
        if record is None or len(record) != 1:
            report.add("bad-structure", "record must wrap exactly one payload element", ordinal)
        if date is not None and not DateFormat.is_valid(date.text or ""):
            report.add("invalid-date", f"Creation datetime {date.text!r} is not {DateFormat.GRANULARITY}", ordinal)
        key = identifier.text if identifier is not None else None
        if key is not None:
            if key in seen:
                report.add("duplicate-key", f"Record identifier {key} occurs more than once", ordinal)
            seen.add(key)
        identifiers.append(key)
    return identifiers


def validate_tape(source, label: str = "-") -> ValidationReport:
    """
    Check a tape and report every problem found; never raises for bad content.

    Args:
        source: Path, bytes or readable binary stream.
        label (str): Name of the tape in the report.

    Returns:
        ValidationReport: Empty findings for a valid tape; record ordinals are 0-based.
    """
    report = ValidationReport(path=label, kind="tape")
    root = _full_parse(source, report)
    census = _census(root, report) if root is not None else None

    try:
        scan = scan_tape(source)
    except ScanError as exc:
        report.add("scan-error", str(exc), exc.record_ordinal, exc.offset)
        if census is not None:
            report.record_count = len(census)
        return report
    report.record_count = len(scan.records)

    if census is not None:
        if len(census) != len(scan.records):
            report.add("census-mismatch",
                       f"Full parse found {len(census)} records, byte scan found {len(scan.records)}")
        for ordinal, (key, scanned) in enumerate(zip(census, scan.records)):
            if key != scanned.admin.record_id:
                report.add("census-mismatch",
                           f"Full parse found {key!r}, byte scan found {scanned.admin.record_id!r}", ordinal)

    for ordinal, scanned in enumerate(scan.records):
        try:
            record = read_record_at(source, scanned.extent)
        except CorruptExtentError as exc:
            report.add("corrupt-extent", str(exc), ordinal, scanned.extent.offset)
            continue
        if record.admin != scanned.admin:
            report.add("corrupt-extent", "Record read back by extent differs from the scanned record",
                       ordinal, scanned.extent.offset)
        try:
            check_payload(record.payload)
        except PayloadError as exc:
            report.add("payload-error", str(exc), ordinal, scanned.extent.offset)
        expected = record.admin.get_property(PAYLOAD_DIGEST)
        if expected is not None and expected != bytes_digest(record.payload):
            report.add("digest-mismatch", f"Payload digest of {record.admin.record_id} does not match",
                       ordinal, scanned.extent.offset)

    if isinstance(source, (str, os.PathLike)):
        entries = [
            IndexEntry(key=scanned.admin.record_id, extent=scanned.extent, datestamp=scanned.admin.created, ordinal=ordinal)
            for ordinal, scanned in enumerate(scan.records)
        ]
        report.findings.extend(compare_with_index(id_index_path(source), source, entries))

    if not report.ok:
        logger.warning("Tape %s failed validation with %d findings", label, len(report.findings))
    return report
