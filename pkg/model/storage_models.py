"""
Pydantic models shared by the tape, ARC and index layers: byte extents, index
entries and validation reports.
"""

from datetime import datetime
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class ByteExtent(BaseModel):
    """
    A run of bytes inside an immutable file.

    Attributes:
        offset (int): Byte position from the start of the file.
        length (int): Number of bytes.
    """

    model_config = ConfigDict(frozen=True)

    offset: int = Field(..., ge=0)
    length: int = Field(..., ge=0)

    @property
    def end(self) -> int:
        return self.offset + self.length

    def shifted(self, delta: int) -> "ByteExtent":
        """
        The same-sized extent moved by `delta` bytes (never before byte 0).
        """
        return ByteExtent(offset=max(self.offset + delta, 0), length=self.length)

    def __str__(self) -> str:
        return f"{self.offset}+{self.length}"


class IndexEntry(BaseModel):
    """
    One line of a portable index file.

    Attributes:
        key (str): Record identifier (tapes) or datastream identifier (ARC files).
        extent (ByteExtent): Where the record lives in the target file.
        datestamp (datetime): Creation datetime (tapes) or archive date (ARC files), seconds precision, UTC.
        ordinal (int): Position of the record in file order.
    """

    model_config = ConfigDict(frozen=True)

    key: str
    extent: ByteExtent
    datestamp: datetime
    ordinal: int = Field(..., ge=0)


class ValidationFinding(BaseModel):
    """
    One problem found while validating a tape or ARC file.

    Attributes:
        code (str): Short machine-readable finding code.
        message (str): Human readable explanation.
        record_ordinal (Optional[int]): Record the finding is about, if any.
        offset (Optional[int]): Byte offset the finding is about, if known.
    """

    code: str
    message: str
    record_ordinal: Optional[int] = None
    offset: Optional[int] = None

    def to_line(self) -> str:
        ordinal = "-" if self.record_ordinal is None else str(self.record_ordinal)
        offset = "-" if self.offset is None else str(self.offset)
        return f"finding\t{self.code}\t{ordinal}\t{offset}\t{self.message}"


class ValidationReport(BaseModel):
    """
    Outcome of validating one file. An empty findings list means the file is valid.
    """

    path: str
    kind: str
    record_count: int = 0
    findings: List[ValidationFinding] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def add(self, code: str, message: str, record_ordinal: Optional[int] = None,
            offset: Optional[int] = None) -> None:
        self.findings.append(
            ValidationFinding(code=code, message=message, record_ordinal=record_ordinal, offset=offset)
        )

    def to_lines(self) -> List[str]:
        status = "valid" if self.ok else "invalid"
        lines = [f"{status}\t{self.kind}\t{self.path}\trecords={self.record_count}"]
        lines.extend(finding.to_line() for finding in self.findings)
        return lines
