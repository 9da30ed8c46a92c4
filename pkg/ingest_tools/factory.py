"""
Builds the pieces an ingest writes: OpenURLs that point into ARC files and the
wrapper documents that become tape records, and parses wrappers back.

Wrapper vocabulary (namespace `urn:xmltape:wrapper:1.0`, prefix `w`):

    <w:object xmlns:w="urn:xmltape:wrapper:1.0" packageId="..." contentId="..." created="...">
      <w:metadata>METADATA ELEMENT, VERBATIM</w:metadata>
      <w:datastream dsId="..." arcId="..." mediaType="..." ref="OPENURL"/>
      ...
    </w:object>

serialized on one line without indentation.
"""

from typing import List, Sequence, Union
from urllib.parse import quote, urlparse
from xml.sax.saxutils import escape

from identifiers import NamespaceClass, RepoUri, parse_as
from lib.datestamp import DateFormat
from lib.errors import (
    InvalidBaseUrlError,
    InvalidClassError,
    InvalidSubmissionError,
    MalformedIdentifierError,
    PayloadError,
)
from lib.xmlspan import ElementSpan, SpanTokenizer, XmlSpanError
from model.ingest_models import DatastreamRef, SubmissionObject, WrapperDocument
from tape_tools.writer import check_payload

WRAPPER_NS = "urn:xmltape:wrapper:1.0"
WRAPPER_PREFIX = "w"
OPENURL_VERSION = "Z39.88-2004"

_ATTRIBUTE_ENTITIES = {'"': "&quot;", "\n": "&#10;", "\r": "&#13;", "\t": "&#9;"}


def _attr(name: str, value: str) -> str:
    return f' {name}="{escape(value, _ATTRIBUTE_ENTITIES)}"'


class WrapperFactory:
    """
    Static helpers creating and parsing wrapper documents and their OpenURL references.
    """

    @staticmethod
    def make_openurl(arc_base_url: str, ds_id: Union[str, RepoUri]) -> str:
        """
        Build a Key/Encoded-Value inline OpenURL requesting one datastream.

        Args:
            arc_base_url (str): Absolute HTTP(S) base URL of the ARC file's resolver.
            ds_id: Datastream Identifier, sent percent-encoded as `rft_id`.

        Returns:
            str: `<base>?url_ver=Z39.88-2004&rft_id=<encoded ds_id>` (`&` when the base has a query).

        Raises:
            InvalidBaseUrlError: If the base is not an absolute http or https URL.
        """
        parsed = urlparse(arc_base_url or "")
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise InvalidBaseUrlError(f"OpenURL base must be an absolute HTTP URL: {arc_base_url!r}")
        ds_uri = parse_as(ds_id, NamespaceClass.DATASTREAM)
        if "?" not in arc_base_url:
            joiner = "?"
        elif arc_base_url.endswith(("?", "&")):
            joiner = ""
        else:
            joiner = "&"
        return f"{arc_base_url}{joiner}url_ver={OPENURL_VERSION}&rft_id={quote(str(ds_uri), safe='')}"

    @staticmethod
    def check_metadata(metadata: bytes) -> bytes:
        """
        Raises:
            PayloadError: If the metadata is not exactly one well-formed element.
        """
        try:
            return check_payload(metadata, require_namespace=False)
        except PayloadError as exc:
            raise PayloadError(f"Metadata: {exc}") from exc

    @staticmethod
    def make_wrapper(submission: SubmissionObject, refs: Sequence[DatastreamRef],
                     package_id: Union[str, RepoUri], created) -> bytes:
        """
        Serialize the wrapper document of one object.

        Metadata goes in by value, byte for byte; datastreams go in by reference,
        one entry per datastream in submission order.

        Returns:
            bytes: The wrapper element, UTF-8, ready to be a tape record payload.

        Raises:
            InvalidSubmissionError: If the number of references differs from the number of datastreams.
            PayloadError: If the metadata is not a well-formed element.
        """
        if len(refs) != len(submission.datastreams):
            raise InvalidSubmissionError([
                f"{submission.content_id}: {len(refs)} references for {len(submission.datastreams)} datastreams"
            ])
        metadata = WrapperFactory.check_metadata(submission.metadata)
        package_uri = parse_as(package_id, NamespaceClass.PACKAGE)
        head = (
            f"<{WRAPPER_PREFIX}:object xmlns:{WRAPPER_PREFIX}=\"{WRAPPER_NS}\""
            f"{_attr('packageId', str(package_uri))}"
            f"{_attr('contentId', submission.content_id)}"
            f"{_attr('created', DateFormat.format(created))}>"
            f"<{WRAPPER_PREFIX}:metadata>"
        )
        references = "".join(
            f"<{WRAPPER_PREFIX}:datastream"
            f"{_attr('dsId', str(ref.ds_id))}{_attr('arcId', str(ref.arc_id))}"
            f"{_attr('mediaType', ref.media_type)}{_attr('ref', ref.openurl)}/>"
            for ref in refs
        )
        tail = f"</{WRAPPER_PREFIX}:metadata>{references}</{WRAPPER_PREFIX}:object>"
        return head.encode("utf-8") + metadata + tail.encode("utf-8")

    @staticmethod
    def parse_wrapper(data: bytes) -> WrapperDocument:
        """
        Parse a wrapper document; the metadata comes back as the verbatim byte slice.

        Raises:
            PayloadError: If the bytes are not a wrapper document.
        """
        spans: List[ElementSpan] = []
        try:
            root = SpanTokenizer(data, max_depth=2, on_end=spans.append).run()
            if root is None or not root.is_(WRAPPER_NS, "object"):
                raise XmlSpanError("root element is not a wrapper object", 0)
            children = [span for span in spans if span.depth == 2]
            if not children or not children[0].is_(WRAPPER_NS, "metadata"):
                raise XmlSpanError("wrapper must start with its metadata element", root.start)
            metadata = children[0]
            if metadata.content_start is None:
                raise XmlSpanError("wrapper metadata is empty", metadata.start)
            refs = []
            for span in children[1:]:
                if not span.is_(WRAPPER_NS, "datastream"):
                    raise XmlSpanError(f"unexpected element {span.name!r} in wrapper", span.start)
                refs.append(DatastreamRef(
                    ds_id=parse_as(span.attributes["dsId"], NamespaceClass.DATASTREAM),
                    arc_id=parse_as(span.attributes["arcId"], NamespaceClass.ARC),
                    media_type=span.attributes["mediaType"],
                    openurl=span.attributes["ref"],
                ))
            return WrapperDocument(
                package_id=parse_as(root.attributes["packageId"], NamespaceClass.PACKAGE),
                content_id=root.attributes["contentId"],
                created=DateFormat.parse(root.attributes["created"]),
                metadata=bytes(data[metadata.content_start:metadata.content_end]),
                datastreams=refs,
            )
        except KeyError as exc:
            raise PayloadError(f"Wrapper lacks attribute {exc}") from exc
        except (XmlSpanError, MalformedIdentifierError, InvalidClassError, ValueError) as exc:
            raise PayloadError(f"Not a wrapper document: {exc}") from exc


make_openurl = WrapperFactory.make_openurl
make_wrapper = WrapperFactory.make_wrapper
parse_wrapper = WrapperFactory.parse_wrapper
