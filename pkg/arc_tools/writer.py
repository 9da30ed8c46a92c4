"""
Writing ARC (version 1) files.

An ARC file starts with a version block (record 0) followed by one record per
constituent datastream. Every record is a single ASCII header line of five
space-separated fields, the data block, and one newline separator:

    filedesc://<name> 0.0.0.0 <date14> text/plain <len>\\n
    1 0 XMLtapeARC\\n
    URL IP-address Archive-date Content-type Archive-length\\n
    \\n
    <ds-id> 0.0.0.0 <date14> <content-type> <length>\\n<length bytes>\\n
    ...

The writer captures the extent of every record as it writes it; these
write-time extents are what the indexes are built from.
"""

import os
import re
from datetime import datetime
from pathlib import Path
from typing import BinaryIO, List, Optional, Set, Tuple, Union

from identifiers import NamespaceClass, RepoUri, parse_as
from lib.datestamp import DateFormat, utc_now
from lib.errors import (
    DuplicateKeyError,
    InvalidMediaTypeError,
    SealedError,
    WriteOnceViolationError,
)
from lib.fsutil import sink_is_empty
from lib.logger import logger
from model.arc_models import FIELD_LINE, LOCAL_IP, VERSION_LINE, ArcRecordHeader, ArcSummary, ArcVersionBlock
from model.storage_models import ByteExtent

SEPARATOR = b"\n"
VERSION_BLOCK_DATA = f"{VERSION_LINE}\n{FIELD_LINE}\n".encode("ascii")
_MEDIA_TYPE_RE = re.compile(r"^[\x21-\x7e]+$")


def check_media_type(media_type: str) -> str:
    """
    Raises:
        InvalidMediaTypeError: If the media type is empty, not ASCII or contains whitespace.
    """
    if not isinstance(media_type, str) or not _MEDIA_TYPE_RE.match(media_type):
        raise InvalidMediaTypeError(f"Media type {media_type!r} cannot be stored in an ARC header line")
    return media_type


def header_line(url: str, archive_date: datetime, content_type: str, length: int) -> bytes:
    return f"{url} {LOCAL_IP} {DateFormat.format_arc(archive_date)} {content_type} {length}\n".encode("ascii")


def record_size(ds_id: Union[str, RepoUri], media_type: str, length: int) -> int:
    """
    Bytes a datastream record will occupy, separator included.
    """
    # the date field is always 14 digits
    return len(header_line(str(ds_id), datetime(2000, 1, 1), media_type, length)) + length + len(SEPARATOR)


class ArcWriter:
    """
    Exclusive writer of one ARC file, open until sealed.

    Use `create_arc` to obtain one.
    """

    def __init__(self, arc_id: RepoUri, sink: BinaryIO, file_name: str, owns_sink: bool):
        self.arc_id = arc_id
        self.file_name = file_name
        self._sink = sink
        self._owns_sink = owns_sink
        self._position = 0
        self._sealed = False
        self._seen: Set[str] = set()
        self.records: List[Tuple[ArcRecordHeader, ByteExtent]] = []

    @property
    def position(self) -> int:
        return self._position

    @property
    def sealed(self) -> bool:
        return self._sealed

    @property
    def record_count(self) -> int:
        """Datastream records written so far (the version block is not counted)."""
        return max(len(self.records) - 1, 0)

    def _write_record(self, header: ArcRecordHeader, data: bytes) -> ByteExtent:
        line = header_line(header.url, header.archive_date, header.content_type, header.length)
        self._sink.write(line)
        self._sink.write(data)
        self._sink.write(SEPARATOR)
        extent = ByteExtent(offset=self._position, length=len(line) + len(data))
        self._position = extent.end + len(SEPARATOR)
        self.records.append((header, extent))
        return extent

    def _write_version_block(self, created: datetime) -> ByteExtent:
        block = ArcVersionBlock(arc_path_token=f"filedesc://{self.file_name}",
                                creation_date=DateFormat.truncate(created))
        return self._write_record(block.to_header(), block.data)

    def append_datastream(self, ds_id: Union[str, RepoUri], media_type: str, data: bytes,
                          archive_datetime: Optional[datetime] = None) -> ByteExtent:
        """
        Append one datastream record.

        Args:
            ds_id: Datastream Identifier, the URL field of the header.
            media_type (str): Content type; no whitespace.
            data (bytes): The datastream, stored as is (may be empty).
            archive_datetime (Optional[datetime]): Archive date; now when omitted.

        Returns:
            ByteExtent: Header line through data block, separator excluded.

        Raises:
            SealedError: If the writer was sealed.
            InvalidMediaTypeError: If the media type cannot go into a header line.
            DuplicateKeyError: If the datastream identifier was already written to this file.
        """
        if self._sealed:
            raise SealedError(f"ARC file {self.arc_id} is sealed")
        check_media_type(media_type)
        ds_uri = parse_as(ds_id, NamespaceClass.DATASTREAM)
        url = str(ds_uri)
        if url in self._seen:
            raise DuplicateKeyError(f"Datastream {url} already written to {self.arc_id}")
        header = ArcRecordHeader(
            url=url,
            ip=LOCAL_IP,
            archive_date=DateFormat.truncate(archive_datetime or utc_now()),
            content_type=media_type,
            length=len(data),
        )
        extent = self._write_record(header, bytes(data))
        self._seen.add(url)
        logger.debug("ARC %s: %s at %s", self.arc_id.uuid_str, url, extent)
        return extent

    def seal(self) -> ArcSummary:
        """
        Flush and close the file; nothing can be appended afterwards.

        Raises:
            SealedError: If the writer was already sealed.
        """
        if self._sealed:
            raise SealedError(f"ARC file {self.arc_id} is already sealed")
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
        summary = ArcSummary(arc_id=self.arc_id, record_count=self.record_count, total_bytes=self._position)
        logger.info("Sealed ARC file %s: %d records, %d bytes", self.arc_id, summary.record_count,
                    summary.total_bytes)
        return summary


def create_arc(arc_id: Union[str, RepoUri], destination: Union[str, Path, BinaryIO],
               file_name: Optional[str] = None, created: Optional[datetime] = None) -> ArcWriter:
    """
    Start a new ARC file and write its version block.

    Args:
        arc_id: ARC file Identifier.
        destination: A path that must not exist yet, or an empty writable binary stream.
        file_name (Optional[str]): Name recorded in the version block; defaults to `<uuid>.arc`.
        created (Optional[datetime]): Creation date of the version block; now when omitted.

    Raises:
        WriteOnceViolationError: If the destination exists or is not empty.
    """
    arc_uri = parse_as(arc_id, NamespaceClass.ARC)
    if isinstance(destination, (str, os.PathLike)):
        try:
            sink = open(destination, "xb")
        except FileExistsError as exc:
            raise WriteOnceViolationError(f"Refusing to overwrite {destination}") from exc
        owns_sink = True
    else:
        if not sink_is_empty(destination):
            raise WriteOnceViolationError(f"Destination for ARC file {arc_uri} is not empty")
        sink = destination
        owns_sink = False
    writer = ArcWriter(arc_uri, sink, file_name or f"{arc_uri.uuid_str}.arc", owns_sink)
    writer._write_version_block(created or utc_now())
    logger.info("Created ARC file %s", arc_uri)
    return writer
