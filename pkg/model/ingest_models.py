"""
Models for ingestion: what providers submit, the wrapper documents written to
tapes, the ingest configuration and what a finished batch reports.
"""

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from identifiers import RepoUri
from lib.datestamp import Clock, utc_now

DEFAULT_MAX_ARC_BYTES = 500 * 1024 * 1024
ARC_PLACEHOLDER = "{arc_uuid}"
TAPE_PLACEHOLDER = "{tape_uuid}"


class SubmissionDatastream(BaseModel):
    """
    One constituent datastream, held in memory or read lazily from a file.

    Attributes:
        media_type (str): Media type of the bytes.
        data (Optional[bytes]): The bytes, when held in memory.
        path (Optional[Path]): File to read the bytes from otherwise.
    """

    media_type: str
    data: Optional[bytes] = None
    path: Optional[Path] = None

    @model_validator(mode="after")
    def _one_source(self) -> "SubmissionDatastream":
        if (self.data is None) == (self.path is None):
            raise ValueError("A datastream needs exactly one of data or path")
        return self

    def read(self) -> bytes:
        if self.data is not None:
            return self.data
        return self.path.read_bytes()

    def size(self) -> int:
        if self.data is not None:
            return len(self.data)
        return self.path.stat().st_size


class SubmissionObject(BaseModel):
    """
    A Digital Object as received from an information provider.

    Attributes:
        content_id (str): Provider assigned Content Identifier.
        metadata (bytes): One well-formed XML element, stored by value.
        datastreams (List[SubmissionDatastream]): Constituent datastreams, in order.
    """

    content_id: str
    metadata: bytes
    datastreams: List[SubmissionDatastream] = Field(default_factory=list)


class DatastreamRef(BaseModel):
    """
    A by-reference entry of a wrapper document.

    Attributes:
        ds_id (RepoUri): Datastream Identifier.
        arc_id (RepoUri): ARC file holding the datastream.
        media_type (str): Media type of the datastream.
        openurl (str): OpenURL resolving to the datastream bytes.
    """

    model_config = ConfigDict(frozen=True)

    ds_id: RepoUri
    arc_id: RepoUri
    media_type: str
    openurl: str


class WrapperDocument(BaseModel):
    """
    XML representation of one Digital Object: metadata by value, datastreams by reference.
    """

    package_id: RepoUri
    content_id: str
    created: datetime
    metadata: bytes
    datastreams: List[DatastreamRef] = Field(default_factory=list)


@dataclass(frozen=True)
class IngestConfig:
    """
    Parameters of one ingest run.

    Attributes:
        max_arc_bytes (int): An ARC file is rolled over before it would grow past this size.
        openurl_base_template (str): Base URL of an ARC file's resolver, with `{arc_uuid}`.
        oai_base_template (str): Base URL of a tape's OAI-PMH repository, with `{tape_uuid}`.
        clock (Clock): Source of creation datetimes.
        provenance (Tuple[Tuple[str, str], ...]): Extra tape-level provenance pairs.
        digest_payloads (bool): Attach a payload digest to every tape record.
    """

    max_arc_bytes: int = DEFAULT_MAX_ARC_BYTES
    openurl_base_template: str = "http://127.0.0.1:8080/openurl/" + ARC_PLACEHOLDER
    oai_base_template: str = "http://127.0.0.1:8080/oai/" + TAPE_PLACEHOLDER
    clock: Clock = utc_now
    provenance: Tuple[Tuple[str, str], ...] = field(default_factory=tuple)
    digest_payloads: bool = True

    def __post_init__(self):
        if self.max_arc_bytes <= 0:
            raise ValueError("max_arc_bytes must be positive")
        for name, template, placeholder in (
            ("openurl_base_template", self.openurl_base_template, ARC_PLACEHOLDER),
            ("oai_base_template", self.oai_base_template, TAPE_PLACEHOLDER),
        ):
            if template.count(placeholder) != 1:
                raise ValueError(f"{name} must contain {placeholder} exactly once: {template!r}")

    def openurl_base(self, arc_id: RepoUri) -> str:
        return self.openurl_base_template.replace(ARC_PLACEHOLDER, arc_id.uuid_str)

    def oai_base(self, tape_id: RepoUri) -> str:
        return self.oai_base_template.replace(TAPE_PLACEHOLDER, tape_id.uuid_str)


class IngestedObject(BaseModel):
    """
    Identifiers accorded to one submitted object.
    """

    content_id: str
    package_id: RepoUri
    created: datetime
    ds_ids: List[RepoUri] = Field(default_factory=list)

    def to_line(self) -> str:
        return "\t".join([self.content_id, str(self.package_id), ",".join(str(ds) for ds in self.ds_ids)])


class IngestReport(BaseModel):
    """
    Everything a committed batch produced.
    """

    tape_id: RepoUri
    arc_ids: List[RepoUri] = Field(default_factory=list)
    objects: List[IngestedObject] = Field(default_factory=list)
    tape_path: Path
    arc_paths: List[Path] = Field(default_factory=list)
    index_paths: List[Path] = Field(default_factory=list)

    def to_manifest(self) -> str:
        """
        Line-oriented manifest: `# tape`/`# arc` comment lines, then one line per object.
        """
        lines = [f"# tape {self.tape_id}"]
        lines.extend(f"# arc {arc_id}" for arc_id in self.arc_ids)
        lines.extend(obj.to_line() for obj in self.objects)
        return "\n".join(lines) + "\n"

