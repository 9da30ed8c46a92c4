"""
Writing XMLtapes.

The writer serializes records itself and counts every byte it emits, so the
extent of each record container is known exactly at write time.
"""

import os
from pathlib import Path
from typing import BinaryIO, List, Set, Union

from lxml import etree

from identifiers import NamespaceClass, parse_as
from lib.errors import DuplicateKeyError, PayloadError, SealedError, WriteOnceViolationError
from lib.fsutil import bytes_digest, sink_is_empty
from lib.logger import logger
from model.storage_models import ByteExtent
from model.tape_models import ScannedRecord, TapeAdmin, TapeRecord, TapeSummary

from .vocabulary import PAYLOAD_DIGEST, RECORD_SEPARATOR, TAPE_CLOSE, serialize_record, serialize_tape_head

_PAYLOAD_PARSER = etree.XMLParser(resolve_entities=False, no_network=True, huge_tree=True, remove_comments=False)


def check_payload(payload: bytes, require_namespace: bool = True) -> bytes:
    """
    Check that a payload is exactly one self-contained element, namespace-qualified
    unless `require_namespace` is off.

    No XML declaration, document type, leading or trailing content (not even
    whitespace or comments) is allowed: the bytes are stored verbatim and must
    come back out of a record container unchanged.

    Raises:
        PayloadError: Describing the first violated rule.
    """
    if not isinstance(payload, (bytes, bytearray)):
        raise PayloadError("Payload must be bytes")
    payload = bytes(payload)
    if not payload.startswith(b"<") or not payload.endswith(b">"):
        raise PayloadError("Payload must start with '<' and end with '>'")
    if payload.startswith(b"<?") or payload.startswith(b"<!"):
        raise PayloadError("Payload must start with its element; no declaration, comment or document type")
    try:
        payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise PayloadError(f"Payload is not UTF-8 at byte {exc.start}") from exc
    try:
        root = etree.fromstring(payload, _PAYLOAD_PARSER)
    except etree.XMLSyntaxError as exc:
        raise PayloadError(f"Payload is not well-formed: {exc}") from exc
    if root.getroottree().docinfo.doctype:
        raise PayloadError("Payload must not carry a document type declaration")
    if root.getprevious() is not None or root.getnext() is not None:
        raise PayloadError("Payload must consist of exactly one element")
    if require_namespace and etree.QName(root).namespace is None:
        raise PayloadError(f"Payload root element <{root.tag}> is not namespace-qualified")
    return payload


class TapeWriter:
    """
    Exclusive writer of one XMLtape, open until sealed.

    Use `create_tape` to obtain one.
    """

    def __init__(self, admin: TapeAdmin, sink: BinaryIO, owns_sink: bool, digest_payloads: bool):
        self.admin = admin
        self.digest_payloads = digest_payloads
        self._sink = sink
        self._owns_sink = owns_sink
        self._position = 0
        self._sealed = False
        self._ids: Set[str] = set()
        self.records: List[ScannedRecord] = []

    @property
    def tape_id(self):
        return self.admin.tape_id

    @property
    def position(self) -> int:
        return self._position

    @property
    def sealed(self) -> bool:
        return self._sealed

    def _write(self, data: bytes) -> None:
        self._sink.write(data)
        self._position += len(data)

    def append_record(self, record: TapeRecord) -> ByteExtent:
        """
        Append one record container.

        When payload digests are enabled and the record carries none, a
        `payloadDigest` property is added to its administrative section.

        Returns:
            ByteExtent: From the `<` of the container's start tag through the `>` of its end tag.

        Raises:
            SealedError: If the tape was sealed.
            DuplicateKeyError: If the record identifier is already on this tape.
            PayloadError: If the payload is not a self-contained, namespace-qualified element.
        """
        if self._sealed:
            raise SealedError(f"Tape {self.tape_id} is sealed")
        admin = record.admin
        if admin.record_id in self._ids:
            raise DuplicateKeyError(f"Record {admin.record_id} already on tape {self.tape_id}")
        payload = check_payload(record.payload)
        if self.digest_payloads and admin.get_property(PAYLOAD_DIGEST) is None:
            admin = admin.model_copy(
                update={"properties": admin.properties + ((PAYLOAD_DIGEST, bytes_digest(payload)),)}
            )
        try:
            container = serialize_record(admin, payload)
        except ValueError as exc:
            raise PayloadError(str(exc)) from exc
        extent = ByteExtent(offset=self._position, length=len(container))
        self._write(container)
        self._write(RECORD_SEPARATOR)
        self._ids.add(admin.record_id)
        self.records.append(ScannedRecord(admin=admin, extent=extent))
        logger.debug("Tape %s: %s at %s", self.tape_id.uuid_str, admin.record_id, extent)
        return extent

    def seal(self) -> TapeSummary:
        """
        Close the root element and flush; nothing can be appended afterwards.

        Raises:
            SealedError: If the tape was already sealed.
        """
        if self._sealed:
            raise SealedError(f"Tape {self.tape_id} is already sealed")
        self._write(TAPE_CLOSE)
        self._sink.flush()
        fileno = getattr(self._sink, "fileno", None)
        if fileno is not None:
            try:
                os.fsync(fileno())
            except (OSError, ValueError):
                pass
        if self._owns_sink:
            self._sink.close()
        self._sealed = True
        summary = TapeSummary(tape_id=self.tape_id, record_count=len(self.records), byte_size=self._position)
        logger.info("Sealed tape %s: %d records, %d bytes", self.tape_id, summary.record_count, summary.byte_size)
        return summary


def create_tape(tape_admin: TapeAdmin, destination: Union[str, Path, BinaryIO],
                digest_payloads: bool = False) -> TapeWriter:
    """
    Start a new tape and write its prolog and tape-level administrative section.

    Args:
        tape_admin (TapeAdmin): Tape identifier, associated ARC files and provenance.
        destination: A path that must not exist yet, or an empty writable binary stream.
        digest_payloads (bool): Attach a `payloadDigest` property to every record.

    Raises:
        WriteOnceViolationError: If the destination exists or is not empty.
        InvalidClassError: If the tape identifier is not of class tape.
    """
    parse_as(tape_admin.tape_id, NamespaceClass.TAPE)
    for arc_id in tape_admin.arc_ids:
        parse_as(arc_id, NamespaceClass.ARC)
    head = serialize_tape_head(tape_admin)
    if isinstance(destination, (str, os.PathLike)):
        try:
            sink = open(destination, "xb")
        except FileExistsError as exc:
            raise WriteOnceViolationError(f"Refusing to overwrite {destination}") from exc
        owns_sink = True
    else:
        if not sink_is_empty(destination):
            raise WriteOnceViolationError(f"Destination for tape {tape_admin.tape_id} is not empty")
        sink = destination
        owns_sink = False
    writer = TapeWriter(tape_admin, sink, owns_sink, digest_payloads)
    writer._write(head)
    logger.info("Created tape %s with %d ARC files", tape_admin.tape_id, len(tape_admin.arc_ids))
    return writer


def seal_tape(writer: TapeWriter) -> TapeSummary:
    return writer.seal()
