"""
Pydantic models describing XMLtapes: tape-level and record-level administrative
information, records, and what writers and scanners report.
"""

from datetime import datetime
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from identifiers import RepoUri
from lib.datestamp import DateFormat
from model.storage_models import ByteExtent

Property = Tuple[str, str]


class TapeAdmin(BaseModel):
    """
    The tape-level administrative section.

    Attributes:
        tape_id (RepoUri): XMLtape Identifier.
        arc_ids (List[RepoUri]): ARC files associated with the tape, in creation order.
        provenance (List[Property]): Name/value pairs such as processing software and time.
    """

    tape_id: RepoUri
    arc_ids: List[RepoUri] = Field(default_factory=list)
    provenance: List[Property] = Field(default_factory=list)


class TapeRecordAdmin(BaseModel):
    """
    The record-level administrative section.

    Attributes:
        record_id (str): Record identifier; the Package Identifier in wrapper tapes.
        created (datetime): Creation datetime, seconds precision, UTC.
        properties (List[Property]): Optional additional name/value pairs.
    """

    model_config = ConfigDict(frozen=True)

    record_id: str
    created: datetime
    properties: Tuple[Property, ...] = ()

    @property
    def datestamp(self) -> str:
        return DateFormat.format(self.created)

    def get_property(self, name: str) -> Optional[str]:
        for key, value in self.properties:
            if key == name:
                return value
        return None


class TapeRecord(BaseModel):
    """
    One record: administrative information plus a namespace-qualified XML payload.

    Attributes:
        admin (TapeRecordAdmin): Record-level administrative information.
        payload (bytes): The payload element, UTF-8 encoded, stored and returned verbatim.
    """

    admin: TapeRecordAdmin
    payload: bytes


class TapeSummary(BaseModel):
    """
    What sealing a tape reports.
    """

    tape_id: RepoUri
    record_count: int
    byte_size: int


class ScannedRecord(BaseModel):
    """
    A record found by a sequential scan, with its byte extent.
    """

    admin: TapeRecordAdmin
    extent: ByteExtent


class TapeScan(BaseModel):
    """
    Result of a sequential scan: the tape-level section and every record in file order.
    """

    admin: TapeAdmin
    records: List[ScannedRecord] = Field(default_factory=list)
