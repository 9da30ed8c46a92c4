"""
Reading XMLtapes: the byte-accurate sequential scan and random access by extent.

Both work on the raw encoded bytes through `lib.xmlspan`, never through a
tree built by an offset-unaware parser.
"""

from typing import List, Optional, Tuple

from identifiers import NamespaceClass, parse_as
from lib.datestamp import DateFormat
from lib.errors import CorruptExtentError, InvalidClassError, MalformedIdentifierError, ScanError
from lib.fsutil import map_source, open_source, source_size
from lib.logger import logger
from lib.xmlspan import ElementSpan, SpanTokenizer, XmlSpanError
from model.storage_models import ByteExtent
from model.tape_models import ScannedRecord, TapeAdmin, TapeRecord, TapeRecordAdmin, TapeScan

from .vocabulary import (
    ARC_ID,
    DATE,
    IDENTIFIER,
    NS,
    PROP,
    RECORD,
    RECORD_ADMIN,
    TAPE,
    TAPE_ADMIN,
    TAPE_ID,
    TAPE_RECORD,
)


def _prop(span: ElementSpan) -> Tuple[str, str]:
    if "name" not in span.attributes or "value" not in span.attributes:
        raise XmlSpanError("prop needs a name and a value attribute", span.start)
    return span.attributes["name"], span.attributes["value"]


class RecordCollector:
    """
    Checks the structure of one record container and collects its parts.

    Spans are fed in with their depth relative to the container (`base_depth`
    is the container's own depth).
    """

    def __init__(self, base_depth: int):
        self.base_depth = base_depth
        self.reset()

    def reset(self) -> None:
        self.identifier: Optional[str] = None
        self.date: Optional[str] = None
        self.properties: List[Tuple[str, str]] = []
        self.payload: Optional[ElementSpan] = None
        self._section: Optional[str] = None
        self._admin_done = False
        self._record_done = False

    def start(self, span: ElementSpan) -> None:
        level = span.depth - self.base_depth
        if level == 1:
            if span.is_(NS, RECORD_ADMIN) and not self._admin_done and not self._record_done:
                self._section = RECORD_ADMIN
            elif span.is_(NS, RECORD) and self._admin_done and not self._record_done:
                self._section = RECORD
            else:
                raise XmlSpanError(f"unexpected element {span.name!r} in record container", span.start)
        elif level == 2 and self._section == RECORD and self.payload is not None:
            raise XmlSpanError("record must wrap exactly one payload element", span.start)

    def end(self, span: ElementSpan) -> None:
        level = span.depth - self.base_depth
        if level == 2 and self._section == RECORD_ADMIN:
            if span.namespace != NS:
                raise XmlSpanError(f"unexpected element {span.name!r} in recordAdmin", span.start)
            if span.name == IDENTIFIER:
                if self.identifier is not None:
                    raise XmlSpanError("identifier occurs twice", span.start)
                self.identifier = span.text
            elif span.name == DATE:
                if self.date is not None:
                    raise XmlSpanError("date occurs twice", span.start)
                if self.identifier is None:
                    raise XmlSpanError("date must follow identifier", span.start)
                self.date = span.text
            elif span.name == PROP:
                self.properties.append(_prop(span))
            else:
                raise XmlSpanError(f"unexpected element {span.name!r} in recordAdmin", span.start)
        elif level == 2 and self._section == RECORD:
            self.payload = span
        elif level == 1:
            if self._section == RECORD_ADMIN:
                self._admin_done = True
            else:
                if self.payload is None:
                    raise XmlSpanError("record holds no payload element", span.start)
                if span.text.strip():
                    raise XmlSpanError("record holds text besides its payload element", span.start)
                self._record_done = True
            self._section = None

    def finish(self, container: ElementSpan) -> TapeRecordAdmin:
        if container.text.strip():
            raise XmlSpanError("text directly inside a record container", container.start)
        if self.identifier is None or self.date is None:
            missing = IDENTIFIER if self.identifier is None else DATE
            raise XmlSpanError(f"missing mandatory admin element {missing!r}", container.start)
        if not self._record_done:
            raise XmlSpanError("record container has no record element", container.start)
        try:
            created = DateFormat.parse(self.date)
        except ValueError as exc:
            raise XmlSpanError(str(exc), container.start) from exc
        return TapeRecordAdmin(record_id=self.identifier, created=created, properties=tuple(self.properties))


class _TapeScanner:
    """Expat callbacks for a whole tape: root, admin section, then record containers."""

    def __init__(self):
        self.admin: Optional[TapeAdmin] = None
        self.records: List[ScannedRecord] = []
        self.ordinal: Optional[int] = None
        self._collector = RecordCollector(base_depth=2)
        self._tape_id: Optional[str] = None
        self._arc_ids: List[str] = []
        self._provenance: List[Tuple[str, str]] = []
        self._in_admin = False

    def start(self, span: ElementSpan) -> None:
        if span.depth == 1:
            if not span.is_(NS, TAPE):
                raise XmlSpanError(f"root element must be {TAPE!r} in {NS}", span.start)
        elif span.depth == 2:
            if span.is_(NS, TAPE_ADMIN):
                if self.admin is not None or self._in_admin:
                    raise XmlSpanError("only one tapeAdmin section is allowed", span.start)
                self._in_admin = True
            elif span.is_(NS, TAPE_RECORD):
                if self.admin is None:
                    raise XmlSpanError("tapeAdmin must come before the first record", span.start)
                self.ordinal = len(self.records)
                self._collector.reset()
            else:
                raise XmlSpanError(f"unexpected element {span.name!r} in tape", span.start)
        elif self._in_admin:
            if span.depth == 3 and (span.namespace != NS or span.name not in (TAPE_ID, ARC_ID, PROP)):
                raise XmlSpanError(f"unexpected element {span.name!r} in tapeAdmin", span.start)
        else:
            self._collector.start(span)

    def end(self, span: ElementSpan) -> None:
        if span.depth == 1:
            if span.text.strip():
                raise XmlSpanError("text directly inside the tape element", span.start)
            if self.admin is None:
                raise XmlSpanError("tape has no tapeAdmin section", span.start)
        elif span.depth == 2 and self._in_admin:
            self._in_admin = False
            self.admin = self._build_admin(span)
        elif span.depth == 2:
            admin = self._collector.finish(span)
            self.records.append(ScannedRecord(admin=admin, extent=ByteExtent(offset=span.start,
                                                                             length=span.end - span.start)))
            self.ordinal = None
        elif self._in_admin and span.depth == 3:
            if span.name == TAPE_ID:
                if self._tape_id is not None:
                    raise XmlSpanError("tapeId occurs twice", span.start)
                self._tape_id = span.text
            elif span.name == ARC_ID:
                self._arc_ids.append(span.text)
            else:
                self._provenance.append(_prop(span))
        elif not self._in_admin:
            self._collector.end(span)

    def _build_admin(self, span: ElementSpan) -> TapeAdmin:
        if self._tape_id is None:
            raise XmlSpanError("tapeAdmin has no tapeId", span.start)
        try:
            return TapeAdmin(
                tape_id=parse_as(self._tape_id, NamespaceClass.TAPE),
                arc_ids=[parse_as(arc_id, NamespaceClass.ARC) for arc_id in self._arc_ids],
                provenance=self._provenance,
            )
        except (MalformedIdentifierError, InvalidClassError) as exc:
            raise XmlSpanError(str(exc), span.start) from exc


def scan_tape(source) -> TapeScan:
    """
    Stream through a complete tape and report every record with its exact extent.

    Args:
        source: Path, bytes or readable binary stream of a sealed tape.

    Returns:
        TapeScan: The tape-level section and every record's admin and extent, in file order.

    Raises:
        ScanError: If the tape is malformed; carries the byte offset and the ordinal of
            the record being scanned.
    """
    scanner = _TapeScanner()
    with map_source(source) as buffer:
        try:
            SpanTokenizer(buffer, max_depth=4, on_start=scanner.start, on_end=scanner.end).run()
        except XmlSpanError as exc:
            raise ScanError(str(exc), exc.offset, scanner.ordinal) from exc
    logger.debug("Scanned tape %s: %d records", scanner.admin.tape_id, len(scanner.records))
    return TapeScan(admin=scanner.admin, records=scanner.records)


def parse_record_container(data: bytes) -> TapeRecord:
    """
    Parse the bytes of exactly one record container.

    Raises:
        CorruptExtentError: If the bytes are not exactly one well-formed record container.
    """
    collector = RecordCollector(base_depth=1)

    def start(span: ElementSpan) -> None:
        if span.depth == 1:
            if span.start != 0:
                raise XmlSpanError("record container does not start at the first byte", span.start)
            if not span.is_(NS, TAPE_RECORD):
                raise XmlSpanError(f"expected {TAPE_RECORD!r} element", span.start)
        else:
            collector.start(span)

    def end(span: ElementSpan) -> None:
        if span.depth > 1:
            collector.end(span)

    try:
        root = SpanTokenizer(data, max_depth=3, on_start=start, on_end=end).run()
        if root is None or root.end != len(data):
            raise XmlSpanError("record container does not end at the last byte", root.end if root else 0)
        admin = collector.finish(root)
    except XmlSpanError as exc:
        raise CorruptExtentError(f"Not a record container: {exc}") from exc
    payload = collector.payload
    return TapeRecord(admin=admin, payload=bytes(data[payload.start:payload.end]))


def read_record_at(source, extent: ByteExtent) -> TapeRecord:
    """
    Read one record by extent with a single seek.

    Returns:
        TapeRecord: Administrative information and the verbatim payload bytes.

    Raises:
        CorruptExtentError: If the extent lies outside the file or its bytes are not
            exactly one record container.
    """
    with open_source(source) as stream:
        size = source_size(stream)
        if extent.end > size:
            raise CorruptExtentError(f"Extent {extent} reaches past the end of the tape ({size} bytes)")
        stream.seek(extent.offset)
        data = stream.read(extent.length)
    return parse_record_container(data)


class _AdminRead(Exception):
    pass


def read_tape_admin(source) -> TapeAdmin:
    """
    Read only the tape-level section; parsing stops right after it.

    Raises:
        ScanError: If the tape does not start with a well-formed admin section.
    """
    scanner = _TapeScanner()

    def end(span: ElementSpan) -> None:
        scanner.end(span)
        if scanner.admin is not None:
            raise _AdminRead()

    with map_source(source) as buffer:
        try:
            SpanTokenizer(buffer, max_depth=3, on_start=scanner.start, on_end=end).run()
        except _AdminRead:
            return scanner.admin
        except XmlSpanError as exc:
            raise ScanError(str(exc), exc.offset) from exc
    raise ScanError("tape has no tapeAdmin section", 0)
