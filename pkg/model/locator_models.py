"""
Models of the Identifier Locator.
"""

from datetime import datetime

from pydantic import BaseModel, ConfigDict

from identifiers import RepoUri
from lib.datestamp import DateFormat


class VersionEntry(BaseModel):
    """
    One version of a Digital Object.

    Attributes:
        content_id (str): Content Identifier shared by all versions.
        package_id (RepoUri): Package Identifier of this version's wrapper document.
        tape_id (RepoUri): Tape holding the wrapper document.
        created (datetime): Creation datetime of the wrapper document.
    """

    model_config = ConfigDict(frozen=True)

    content_id: str
    package_id: RepoUri
    tape_id: RepoUri
    created: datetime

    def to_line(self) -> str:
        return "\t".join([self.content_id, str(self.package_id), str(self.tape_id), DateFormat.format(self.created)])


class ResolvedVersion(BaseModel):
    """
    A version as handed to agents: where to fetch it with OAI-PMH GetRecord.
    """

    package_id: RepoUri
    tape_id: RepoUri
    oai_base_url: str
    created: datetime

    def to_json_dict(self) -> dict:
        return {
            "package_id": str(self.package_id),
            "oai_base_url": self.oai_base_url,
            "created": DateFormat.format(self.created),
        }

    def to_line(self) -> str:
        return "\t".join([str(self.package_id), self.oai_base_url, DateFormat.format(self.created)])
