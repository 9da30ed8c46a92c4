"""
Pydantic models describing ARC (version 1) files.
"""

from datetime import datetime

from pydantic import BaseModel, ConfigDict

from identifiers import RepoUri

VERSION_LINE = "1 0 XMLtapeARC"
FIELD_LINE = "URL IP-address Archive-date Content-type Archive-length"
LOCAL_IP = "0.0.0.0"


class ArcRecordHeader(BaseModel):
    """
    The five fields of an ARC v1 header line.

    Attributes:
        url (str): Datastream Identifier, or `filedesc://<name>` for the version block.
        ip (str): Dotted-quad address of the acquisition host.
        archive_date (datetime): Archive date, seconds precision, UTC.
        content_type (str): Media type, without spaces.
        length (int): Exact byte count of the data block.
    """

    model_config = ConfigDict(frozen=True)

    url: str
    ip: str
    archive_date: datetime
    content_type: str
    length: int

    @property
    def is_version_block(self) -> bool:
        return self.url.startswith("filedesc://")


class ArcVersionBlock(BaseModel):
    """
    Record 0 of every ARC file.

    Attributes:
        arc_path_token (str): `filedesc://<file name>`.
        ip (str): Dotted-quad address; `0.0.0.0` for local content.
        creation_date (datetime): When the file was created.
        content_type (str): Always `text/plain`.
        version_line (str): Always `1 0 XMLtapeARC`.
    """

    model_config = ConfigDict(frozen=True)

    arc_path_token: str
    ip: str = LOCAL_IP
    creation_date: datetime
    content_type: str = "text/plain"
    version_line: str = VERSION_LINE

    @property
    def data(self) -> bytes:
        return f"{self.version_line}\n{FIELD_LINE}\n".encode("ascii")

    def to_header(self) -> ArcRecordHeader:
        return ArcRecordHeader(url=self.arc_path_token, ip=self.ip, archive_date=self.creation_date,
                               content_type=self.content_type, length=len(self.data))


class ArcSummary(BaseModel):
    """
    What sealing an ARC file reports.

    Attributes:
        arc_id (RepoUri): The ARC file Identifier.
        record_count (int): Number of datastream records (the version block is not counted).
        total_bytes (int): Size of the sealed file.
    """

    arc_id: RepoUri
    record_count: int
    total_bytes: int
