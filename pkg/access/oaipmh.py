"""
OAI-PMH 2.0 data provider over one mounted tape.

Every tape is an autonomous repository: its identifiers are the Package
Identifiers of its records, its datestamps are their creation datetimes and it
disseminates exactly one metadata format, the wrapper documents themselves.

Features:
- Response documents are built with lxml using an `oai:` prefix, so a payload
  without namespace prefixes never picks up the envelope's namespace.
- Payloads are never re-serialized: a unique placeholder takes their place in
  the tree and the stored bytes are spliced in after serialization.
- Resumption tokens are self-describing (base64url JSON) and carry a prefix
  of the tape digest, so a remounted different tape rejects them.
"""

import base64
import uuid
from dataclasses import dataclass
from datetime import datetime
from typing import Dict, List, Optional, Sequence, Tuple

import orjson
from lxml import etree

from lib.datestamp import Clock, DateFormat, utc_now
from lib.errors import InvalidRangeError
from lib.logger import logger
from model.ingest_models import TAPE_PLACEHOLDER
from model.storage_models import IndexEntry
from tape_tools.reader import read_record_at
from tape_tools.vocabulary import NS as TAPE_NS, PREFIX as TAPE_PREFIX

from .mount import MountedTape

Params = Sequence[Tuple[str, str]]

DIGEST_PREFIX_LENGTH = 16

VERBS = ("Identify", "ListMetadataFormats", "GetRecord", "ListRecords", "ListIdentifiers", "ListSets")


@dataclass(frozen=True)
class OaiSettings:
    """
    Repository-wide OAI-PMH settings shared by every mounted tape.

    Attributes:
        oai_base_template (str): Base URL of a tape's repository, with `{tape_uuid}`.
        page_size (int): Records or headers per list response.
        metadata_prefix (str): Prefix of the single disseminated format.
        metadata_namespace (str): Namespace of the wrapper documents.
        metadata_schema (str): Schema location advertised for the format.
        repository_name (str): Name reported by Identify; the tape UUID is appended.
        admin_email (str): Contact reported by Identify.
        clock (Clock): Source of response dates.
    """

    oai_base_template: str = "http://127.0.0.1:8080/oai/" + TAPE_PLACEHOLDER
    page_size: int = 500
    metadata_prefix: str = "didl"
    metadata_namespace: str = "urn:xmltape:wrapper:1.0"
    metadata_schema: str = "urn:xmltape:wrapper:1.0"
    repository_name: str = "XMLtape repository"
    admin_email: str = "admin@localhost"
    clock: Clock = utc_now

    def base_url(self, tape: MountedTape) -> str:
        return self.oai_base_template.replace(TAPE_PLACEHOLDER, tape.tape_id.uuid_str)


# ------------------------------------------------------------------------------
# Resumption tokens
# ------------------------------------------------------------------------------

class ResumptionTokenException(Exception):
    pass


@dataclass(frozen=True)
class ResumptionToken:
    """
    Where a list request continues: the tape, the normalized bounds and the cursor.
    """

    tape_uuid: str
    digest_prefix: str
    metadata_prefix: str
    from_date: Optional[str]
    until_date: Optional[str]
    cursor: int

    def encode(self) -> str:
        data = orjson.dumps({
            "t": self.tape_uuid,
            "d": self.digest_prefix,
            "m": self.metadata_prefix,
            "f": self.from_date,
            "u": self.until_date,
            "c": self.cursor,
        })
        return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")

    @classmethod
    def decode(cls, value: str) -> "ResumptionToken":
        try:
            padded = value + "=" * (-len(value) % 4)
            d = orjson.loads(base64.urlsafe_b64decode(padded.encode("ascii")))
            token = cls(
                tape_uuid=d["t"],
                digest_prefix=d["d"],
                metadata_prefix=d["m"],
                from_date=d["f"],
                until_date=d["u"],
                cursor=d["c"],
            )
        except (ValueError, KeyError, TypeError, UnicodeError, orjson.JSONDecodeError):
            raise ResumptionTokenException() from None
        if not isinstance(token.cursor, int) or isinstance(token.cursor, bool) or token.cursor < 0:
            raise ResumptionTokenException()
        for bound in (token.from_date, token.until_date):
            if bound is not None and not (isinstance(bound, str) and DateFormat.is_valid(bound)):
                raise ResumptionTokenException()
        return token


# ------------------------------------------------------------------------------
# Response objects
# ------------------------------------------------------------------------------

class OAI_PMH:
    VERSION = "2.0"

    PMH_NAMESPACE = "http://www.openarchives.org/OAI/2.0/"
    PMH = "{%s}" % PMH_NAMESPACE

    XSI_NAMESPACE = "http://www.w3.org/2001/XMLSchema-instance"
    XSI = "{%s}" % XSI_NAMESPACE

    NSMAP = {"oai": PMH_NAMESPACE, "xsi": XSI_NAMESPACE}

    def __init__(self, base_url: str, response_date: str):
        self.base_url = base_url
        self.response_date = response_date
        self.verb: Optional[str] = None
        self.echo_arguments = True
        self._payloads: Dict[str, bytes] = {}
        self._nonce = uuid.uuid4().hex

    def payload_slot(self, payload: bytes) -> etree._Element:
        """
        An `oai:metadata` element holding a placeholder for `payload`.
        """
        marker = f"@@payload-{self._nonce}-{len(self._payloads)}@@"
        self._payloads[marker] = payload
        metadata = etree.Element(self.PMH + "metadata", nsmap=self.NSMAP)
        metadata.text = marker
        return metadata

    def _to_xml(self) -> etree._Element:
        oai = etree.Element(self.PMH + "OAI-PMH", nsmap=self.NSMAP)
        oai.set(self.XSI + "schemaLocation",
                "http://www.openarchives.org/OAI/2.0/ http://www.openarchives.org/OAI/2.0/OAI-PMH.xsd")

        respdate = etree.SubElement(oai, self.PMH + "responseDate")
        respdate.text = self.response_date

        req = etree.SubElement(oai, self.PMH + "request")
        if self.verb is not None and self.echo_arguments:
            req.set("verb", self.verb)
        req.text = self.base_url
        if self.echo_arguments:
            self.add_request_attributes(req)

        oai.append(self.get_element())
        return oai

    def serialise(self) -> bytes:
        data = etree.tostring(self._to_xml(), xml_declaration=True, encoding="UTF-8")
        for marker, payload in self._payloads.items():
            data = data.replace(marker.encode("ascii"), payload, 1)
        return data

    def get_element(self) -> etree._Element:
        raise NotImplementedError()

    def add_request_attributes(self, element: etree._Element) -> None:
        return

    def make_header(self, identifier: str, datestamp: str) -> etree._Element:
        header = etree.Element(self.PMH + "header", nsmap=self.NSMAP)
        etree.SubElement(header, self.PMH + "identifier").text = identifier
        etree.SubElement(header, self.PMH + "datestamp").text = datestamp
        return header


class GetRecord(OAI_PMH):
    def __init__(self, base_url, response_date, identifier, metadata_prefix):
        super().__init__(base_url, response_date)
        self.verb = "GetRecord"
        self.identifier = identifier
        self.metadata_prefix = metadata_prefix
        self.header = None
        self.metadata = None

    def get_element(self):
        gr = etree.Element(self.PMH + "GetRecord", nsmap=self.NSMAP)
        record = etree.SubElement(gr, self.PMH + "record")
        record.append(self.header)
        record.append(self.metadata)
        return gr

    def add_request_attributes(self, element):
        element.set("identifier", self.identifier)
        element.set("metadataPrefix", self.metadata_prefix)


class Identify(OAI_PMH):
    def __init__(self, base_url, response_date, repo_name, admin_email, tape: MountedTape):
        super().__init__(base_url, response_date)
        self.verb = "Identify"
        self.repo_name = repo_name
        self.admin_email = admin_email
        self.tape = tape

    def get_element(self):
        identify = etree.Element(self.PMH + "Identify", nsmap=self.NSMAP)
        etree.SubElement(identify, self.PMH + "repositoryName").text = self.repo_name
        etree.SubElement(identify, self.PMH + "baseURL").text = self.base_url
        etree.SubElement(identify, self.PMH + "protocolVersion").text = self.VERSION
        etree.SubElement(identify, self.PMH + "adminEmail").text = self.admin_email

        earliest = self.tape.dt_index.earliest
        # epoch for tapes without records
        etree.SubElement(identify, self.PMH + "earliestDatestamp").text = (
            DateFormat.format(earliest) if earliest is not None else "1970-01-01T00:00:00Z"
        )
        etree.SubElement(identify, self.PMH + "deletedRecord").text = "no"
        etree.SubElement(identify, self.PMH + "granularity").text = DateFormat.GRANULARITY

        description = etree.SubElement(identify, self.PMH + "description")
        xt = "{%s}" % TAPE_NS
        admin = etree.SubElement(description, xt + "tapeAdmin", nsmap={TAPE_PREFIX: TAPE_NS})
        etree.SubElement(admin, xt + "tapeId").text = str(self.tape.tape_id)
        for arc_id in self.tape.admin.arc_ids:
            etree.SubElement(admin, xt + "arcId").text = str(arc_id)
        return identify


class ListMetadataFormats(OAI_PMH):
    def __init__(self, base_url, response_date, identifier=None):
        super().__init__(base_url, response_date)
        self.verb = "ListMetadataFormats"
        self.identifier = identifier
        self.formats = []

    def add_format(self, metadata_prefix, schema, metadata_namespace):
        self.formats.append({
            "metadataPrefix": metadata_prefix,
            "schema": schema,
            "metadataNamespace": metadata_namespace,
        })

    def add_request_attributes(self, element):
        if self.identifier is not None:
            element.set("identifier", self.identifier)

    def get_element(self):
        lmf = etree.Element(self.PMH + "ListMetadataFormats", nsmap=self.NSMAP)
        for f in self.formats:
            mdf = etree.SubElement(lmf, self.PMH + "metadataFormat")
            etree.SubElement(mdf, self.PMH + "metadataPrefix").text = f["metadataPrefix"]
            etree.SubElement(mdf, self.PMH + "schema").text = f["schema"]
            etree.SubElement(mdf, self.PMH + "metadataNamespace").text = f["metadataNamespace"]
        return lmf


class _ListResponse(OAI_PMH):
    def __init__(self, base_url, response_date, from_date=None, until_date=None, metadata_prefix=None,
                 resumption_token=None):
        super().__init__(base_url, response_date)
        self.from_date = from_date
        self.until_date = until_date
        self.metadata_prefix = metadata_prefix
        self.resumption_token = resumption_token
        self.records = []
        self.resumption = None

    def set_resumption(self, resumption_token, complete_list_size=None, cursor=None):
        self.resumption = {"resumption_token": resumption_token}
        if complete_list_size is not None:
            self.resumption["complete_list_size"] = complete_list_size
        if cursor is not None:
            self.resumption["cursor"] = cursor

    def add_request_attributes(self, element):
        if self.resumption_token is not None:
            element.set("resumptionToken", self.resumption_token)
            return
        if self.from_date is not None:
            element.set("from", self.from_date)
        if self.until_date is not None:
            element.set("until", self.until_date)
        if self.metadata_prefix is not None:
            element.set("metadataPrefix", self.metadata_prefix)

    def append_items(self, element):
        raise NotImplementedError()

    def get_element(self):
        lr = etree.Element(self.PMH + self.verb, nsmap=self.NSMAP)
        self.append_items(lr)
        if self.resumption is not None:
            rt = etree.SubElement(lr, self.PMH + "resumptionToken")
            if "complete_list_size" in self.resumption:
                rt.set("completeListSize", str(self.resumption["complete_list_size"]))
            if "cursor" in self.resumption:
                rt.set("cursor", str(self.resumption["cursor"]))
            if self.resumption["resumption_token"]:
                rt.text = self.resumption["resumption_token"]
        return lr


class ListIdentifiers(_ListResponse):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.verb = "ListIdentifiers"

    def add_record(self, header):
        self.records.append(header)

    def append_items(self, element):
        for header in self.records:
            element.append(header)


class ListRecords(_ListResponse):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.verb = "ListRecords"

    def add_record(self, metadata, header):
        self.records.append((metadata, header))

    def append_items(self, element):
        for metadata, header in self.records:
            r = etree.SubElement(element, self.PMH + "record")
            r.append(header)
            r.append(metadata)


# ------------------------------------------------------------------------------
# Error Handling
# ------------------------------------------------------------------------------

class OAIPMHError(OAI_PMH):
    code: str = ""
    description: str = ""

    def __init__(self, base_url, response_date, verb=None, arguments: Optional[Params] = None, detail=None):
        super().__init__(base_url, response_date)
        self.verb = verb
        self.arguments = list(arguments or [])
        self.detail = detail

    def add_request_attributes(self, element):
        for name, value in self.arguments:
            if name != "verb":
                element.set(name, value)

    def get_element(self):
        error = etree.Element(self.PMH + "error", nsmap=self.NSMAP)
        error.set("code", self.code)
        error.text = self.detail or self.description
        return error


class BadArgument(OAIPMHError):
    code = "badArgument"
    description = ("The request includes illegal arguments, is missing required arguments, "
                   "includes a repeated argument, or values for arguments have an illegal syntax.")

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.echo_arguments = False


class BadResumptionToken(OAIPMHError):
    code = "badResumptionToken"
    description = "The value of the resumptionToken argument is invalid or expired."


class BadVerb(OAIPMHError):
    code = "badVerb"
    description = ("Value of the verb argument is not a legal OAI-PMH verb, the verb argument is missing, "
                   "or the verb argument is repeated.")

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.echo_arguments = False


class CannotDisseminateFormat(OAIPMHError):
    code = "cannotDisseminateFormat"
    description = ("The metadata format identified by the value given for the metadataPrefix argument "
                   "is not supported by the item or by the repository.")


class IdDoesNotExist(OAIPMHError):
    code = "idDoesNotExist"
    description = "The value of the identifier argument is unknown or illegal in this repository."


class NoRecordsMatch(OAIPMHError):
    code = "noRecordsMatch"
    description = ("The combination of the values of the from, until, set and metadataPrefix arguments "
                   "results in an empty list.")


class NoSetHierarchy(OAIPMHError):
    code = "noSetHierarchy"
    description = "The repository does not support sets."


# ------------------------------------------------------------------------------
# Request handling
# ------------------------------------------------------------------------------

_ALLOWED = {
    "Identify": (set(), set()),
    "ListMetadataFormats": (set(), {"identifier"}),
    "GetRecord": ({"identifier", "metadataPrefix"}, set()),
    "ListRecords": ({"metadataPrefix"}, {"from", "until", "set"}),
    "ListIdentifiers": ({"metadataPrefix"}, {"from", "until", "set"}),
    "ListSets": (set(), set()),
}


class _Request:
    """One OAI-PMH request against one tape."""

    def __init__(self, tape: MountedTape, params: Params, settings: OaiSettings):
        self.tape = tape
        self.params = list(params)
        self.settings = settings
        self.base_url = settings.base_url(tape)
        self.response_date = DateFormat.format(settings.clock())
        self.args: Dict[str, str] = {}
        self.verb: Optional[str] = None

    def error(self, cls, detail=None) -> OAIPMHError:
        return cls(self.base_url, self.response_date, self.verb, self.params, detail)

    def parse(self) -> Optional[OAIPMHError]:
        verbs = [value for name, value in self.params if name == "verb"]
        if len(verbs) != 1 or verbs[0] not in VERBS:
            return self.error(BadVerb)
        self.verb = verbs[0]
        seen = set()
        for name, value in self.params:
            if name in seen:
                return self.error(BadArgument, f"argument {name!r} is repeated")
            seen.add(name)
            if name != "verb":
                self.args[name] = value
        names = set(self.args)
        required, optional = _ALLOWED[self.verb]
        if self.verb in ("ListRecords", "ListIdentifiers", "ListSets") and "resumptionToken" in names:
            if names != {"resumptionToken"}:
                return self.error(BadArgument, "resumptionToken is an exclusive argument")
            return None
        if not required <= names:
            return self.error(BadArgument, f"missing argument(s) {sorted(required - names)}")
        if names - required - optional:
            return self.error(BadArgument, f"illegal argument(s) {sorted(names - required - optional)}")
        return None

    # --------------------------------------------------------------------------

    def check_prefix(self, prefix: str) -> Optional[OAIPMHError]:
        if prefix != self.settings.metadata_prefix:
            return self.error(CannotDisseminateFormat)
        return None

    def record_header(self, response: OAI_PMH, entry: IndexEntry) -> etree._Element:
        return response.make_header(entry.key, DateFormat.format(entry.datestamp))

    def identify(self) -> OAI_PMH:
        return Identify(self.base_url, self.response_date, f"{self.settings.repository_name} {self.tape.tape_id.uuid_str}",
                        self.settings.admin_email, self.tape)

    def list_metadata_formats(self) -> OAI_PMH:
        identifier = self.args.get("identifier")
        if identifier is not None and identifier not in self.tape.id_index:
            return self.error(IdDoesNotExist)
        response = ListMetadataFormats(self.base_url, self.response_date, identifier)
        response.add_format(self.settings.metadata_prefix, self.settings.metadata_schema,
                            self.settings.metadata_namespace)
        return response

    def get_record(self) -> OAI_PMH:
        identifier = self.args["identifier"]
        prefix = self.args["metadataPrefix"]
        if identifier not in self.tape.id_index:
            return self.error(IdDoesNotExist)
        problem = self.check_prefix(prefix)
        if problem is not None:
            return problem
        record = read_record_at(self.tape.path, self.tape.id_index.lookup_id(identifier).extent)
        response = GetRecord(self.base_url, self.response_date, identifier, prefix)
        response.header = response.make_header(record.admin.record_id, record.admin.datestamp)
        response.metadata = response.payload_slot(record.payload)
        return response

    def _bounds(self) -> Tuple[Optional[datetime], Optional[datetime]]:
        """
        Raises:
            ValueError: For malformed, mixed-granularity or inverted bounds.
        """
        bounds = []
        granularities = set()
        for name, upper in (("from", False), ("until", True)):
            text = self.args.get(name)
            if text is None:
                bounds.append(None)
                continue
            value, granularity = DateFormat.parse_harvest_bound(text, upper)
            bounds.append(value)
            granularities.add(granularity)
        if len(granularities) > 1:
            raise ValueError("from and until have different granularities")
        lower, upper = bounds
        if lower is not None and upper is not None and lower > upper:
            raise InvalidRangeError("from is after until")
        return lower, upper

    def list(self) -> OAI_PMH:
        token_text = self.args.get("resumptionToken")
        if token_text is not None:
            try:
                token = ResumptionToken.decode(token_text)
            except ResumptionTokenException:
                return self.error(BadResumptionToken)
            if (token.tape_uuid != self.tape.tape_id.uuid_str
                    or token.digest_prefix != self.tape.digest[:DIGEST_PREFIX_LENGTH]
                    or token.metadata_prefix != self.settings.metadata_prefix):
                return self.error(BadResumptionToken)
            lower = DateFormat.parse(token.from_date) if token.from_date else None
            upper = DateFormat.parse(token.until_date) if token.until_date else None
            prefix, cursor = token.metadata_prefix, token.cursor
        else:
            if "set" in self.args:
                return self.error(NoSetHierarchy)
            try:
                lower, upper = self._bounds()
            except ValueError as exc:
                return self.error(BadArgument, str(exc))
            prefix, cursor = self.args["metadataPrefix"], 0
            problem = self.check_prefix(prefix)
            if problem is not None:
                return problem

        entries = self.tape.dt_index.range_by_datetime(lower, upper)
        if token_text is not None and cursor >= len(entries):
            return self.error(BadResumptionToken)
        if not entries:
            return self.error(NoRecordsMatch)

        cls = ListRecords if self.verb == "ListRecords" else ListIdentifiers
        response = cls(self.base_url, self.response_date, self.args.get("from"), self.args.get("until"),
                       self.args.get("metadataPrefix"), token_text)
        page = entries[cursor:cursor + self.settings.page_size]
        if cls is ListRecords:
            with open(self.tape.path, "rb") as stream:
                for entry in page:
                    record = read_record_at(stream, entry.extent)
                    response.add_record(response.payload_slot(record.payload),
                                        response.make_header(record.admin.record_id, record.admin.datestamp))
        else:
            for entry in page:
                response.add_record(self.record_header(response, entry))

        following = cursor + len(page)
        if following < len(entries):
            token = ResumptionToken(
                tape_uuid=self.tape.tape_id.uuid_str,
                digest_prefix=self.tape.digest[:DIGEST_PREFIX_LENGTH],
                metadata_prefix=prefix,
                from_date=DateFormat.format(lower) if lower is not None else None,
                until_date=DateFormat.format(upper) if upper is not None else None,
                cursor=following,
            )
            response.set_resumption(token.encode(), len(entries), cursor)
        elif cursor > 0:
            response.set_resumption("", len(entries), cursor)
        return response

    def handle(self) -> OAI_PMH:
        problem = self.parse()
        if problem is not None:
            return problem
        if self.verb == "Identify":
            return self.identify()
        if self.verb == "ListMetadataFormats":
            return self.list_metadata_formats()
        if self.verb == "GetRecord":
            return self.get_record()
        if self.verb == "ListSets":
            if "resumptionToken" in self.args:
                return self.error(BadResumptionToken)
            return self.error(NoSetHierarchy)
        return self.list()


def handle_oai(tape: MountedTape, params: Params, settings: Optional[OaiSettings] = None) -> bytes:
    """
    Answer one OAI-PMH request against a mounted tape.

    Args:
        tape (MountedTape): The tape addressed by the request path.
        params: Every query (or form) argument in request order; repeats are kept so
            they can be rejected.
        settings (Optional[OaiSettings]): Base URL template, page size and format description.

    Returns:
        bytes: A UTF-8 OAI-PMH response document. Protocol errors are responses too.
    """
    request = _Request(tape, params, settings or OaiSettings())
    response = request.handle()
    if isinstance(response, OAIPMHError):
        logger.debug("OAI-PMH %s on %s: %s", request.verb, tape.tape_id, response.code)
    return response.serialise()


def oai_error_code(document: bytes) -> Optional[str]:
    """
    The error code of a response document, None for successful responses.
    """
    root = etree.fromstring(document)
    error = root.find(OAI_PMH.PMH + "error")
    return error.get("code") if error is not None else None


def oai_response_items(document: bytes) -> List[etree._Element]:
    """
    The `header` elements of a GetRecord, ListRecords or ListIdentifiers response.
    """
    root = etree.fromstring(document)
    return root.findall(".//" + OAI_PMH.PMH + "header")
