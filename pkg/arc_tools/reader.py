"""
Reading ARC files: sequential scan, random access by extent and validation.
"""

import re
from typing import List, Set, Tuple

from identifiers import NamespaceClass, parse_as
from lib.datestamp import DateFormat
from lib.errors import (
    CorruptRecordError,
    InvalidClassError,
    MalformedIdentifierError,
    OutOfBoundsError,
    ScanError,
)
from lib.fsutil import open_source, source_size
from lib.logger import logger
from model.arc_models import ArcRecordHeader
from model.storage_models import ByteExtent, ValidationReport

from .writer import SEPARATOR, VERSION_BLOCK_DATA

_MAX_HEADER_LINE = 8192
_QUAD_RE = re.compile(r"^(\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3})$")
_URL_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:\S+$")

ArcEntry = Tuple[ArcRecordHeader, ByteExtent]


def parse_header_line(line: bytes) -> ArcRecordHeader:
    """
    Parse one ARC v1 header line, trailing newline included.

    Raises:
        ValueError: Describing the first field that does not conform.
    """
    if not line.endswith(b"\n"):
        raise ValueError("header line is not terminated by a newline")
    try:
        text = line[:-1].decode("ascii")
    except UnicodeDecodeError as exc:
        raise ValueError("header line is not ASCII") from exc
    fields = text.split(" ")
    if len(fields) != 5 or not all(fields):
        raise ValueError(f"expected 5 space-separated fields, found {len(fields)}")
    url, ip, date, content_type, length = fields
    if not _URL_RE.match(url):
        raise ValueError(f"URL field {url!r} is not a URI")
    quad = _QUAD_RE.match(ip)
    if not quad or any(int(part) > 255 for part in quad.groups()):
        raise ValueError(f"IP field {ip!r} is not a dotted quad")
    archive_date = DateFormat.parse_arc(date)
    if not length.isdigit():
        raise ValueError(f"length field {length!r} is not a non-negative integer")
    return ArcRecordHeader(url=url, ip=ip, archive_date=archive_date, content_type=content_type,
                           length=int(length))


def scan_arc(source) -> List[ArcEntry]:
    """
    Walk a complete ARC file record by record.

    Every declared length is checked against the bytes actually present, and
    every data block must be followed by the separator newline.

    Args:
        source: Path, bytes or readable binary stream of a complete ARC file.

    Returns:
        List[ArcEntry]: Header and extent of every record, version block first.

    Raises:
        ScanError: On a malformed header line, a truncated block or a length mismatch.
    """
    entries: List[ArcEntry] = []
    with open_source(source) as stream:
        size = source_size(stream)
        offset = 0
        while offset < size:
            ordinal = len(entries)
            stream.seek(offset)
            line = stream.readline(_MAX_HEADER_LINE)
            try:
                header = parse_header_line(line)
            except ValueError as exc:
                raise ScanError(f"Malformed ARC header line: {exc}", offset, ordinal) from exc
            if (ordinal == 0) != header.is_version_block:
                message = "ARC file must start with a filedesc:// version block" if ordinal == 0 \
                    else "version block found after record 0"
                raise ScanError(message, offset, ordinal)
            data_start = offset + len(line)
            data_end = data_start + header.length
            if data_end > size:
                raise ScanError(
                    f"Truncated data block: {header.length} bytes declared, {size - data_start} present",
                    offset, ordinal,
                )
            stream.seek(data_end)
            if stream.read(len(SEPARATOR)) != SEPARATOR:
                raise ScanError("Declared length does not end at a record separator", data_end, ordinal)
            if ordinal == 0:
                stream.seek(data_start)
                if stream.read(header.length) != VERSION_BLOCK_DATA:
                    raise ScanError("Unexpected version block content", data_start, ordinal)
            entries.append((header, ByteExtent(offset=offset, length=len(line) + header.length)))
            offset = data_end + len(SEPARATOR)
    if not entries:
        raise ScanError("Empty ARC file has no version block", 0)
    logger.debug("Scanned ARC file: %d records", len(entries) - 1)
    return entries


def read_record(source, extent: ByteExtent) -> Tuple[ArcRecordHeader, bytes]:
    """
    Read one record by extent.

    Returns:
        Tuple[ArcRecordHeader, bytes]: The parsed header and the exact data block.

    Raises:
        OutOfBoundsError: If the extent reaches past the end of the file.
        CorruptRecordError: If the bytes at the extent are not one intact record.
    """
    with open_source(source) as stream:
        size = source_size(stream)
        if extent.end > size:
            raise OutOfBoundsError(f"Extent {extent} reaches past the end of the file ({size} bytes)")
        stream.seek(extent.offset)
        chunk = stream.read(extent.length)
        trailer = stream.read(len(SEPARATOR))
    newline = chunk.find(b"\n")
    if newline < 0:
        raise CorruptRecordError(f"No header line at extent {extent}")
    line = chunk[:newline + 1]
    try:
        header = parse_header_line(line)
    except ValueError as exc:
        raise CorruptRecordError(f"Unparseable header line at extent {extent}: {exc}") from exc
    if header.length != extent.length - len(line):
        raise CorruptRecordError(
            f"Declared length {header.length} does not match extent {extent} (data block of {extent.length - len(line)})"
        )
    if trailer != SEPARATOR:
        raise CorruptRecordError(f"Extent {extent} is not followed by a record separator")
    if not header.is_version_block:
        try:
            parse_as(header.url, NamespaceClass.DATASTREAM)
        except (MalformedIdentifierError, InvalidClassError) as exc:
            raise CorruptRecordError(f"URL field at extent {extent} is not a datastream identifier") from exc
    return header, chunk[len(line):]


def validate_arc(source, label: str = "-") -> ValidationReport:
    """
    Check an ARC file and report every problem found; never raises for bad content.
    """
    report = ValidationReport(path=label, kind="arc")
    try:
        entries = scan_arc(source)
    except ScanError as exc:
        report.add("scan-error", str(exc), exc.record_ordinal, exc.offset)
        return report
    report.record_count = len(entries) - 1
    seen: Set[str] = set()
    for ordinal, (header, extent) in enumerate(entries[1:], start=1):
        try:
            parse_as(header.url, NamespaceClass.DATASTREAM)
        except (MalformedIdentifierError, InvalidClassError) as exc:
            report.add("malformed-identifier", str(exc), ordinal, extent.offset)
            continue
        if header.url in seen:
            report.add("duplicate-key", f"Datastream {header.url} occurs more than once", ordinal, extent.offset)
        seen.add(header.url)
    return report
