"""
The XMLtape vocabulary and its exact serialization.

A tape is UTF-8 without byte order mark and is laid out byte for byte as:

    <?xml version="1.0" encoding="UTF-8"?>\\n
    <xt:tape xmlns:xt="urn:xmltape:1.0">\\n
    <xt:tapeAdmin><xt:tapeId>ID</xt:tapeId>[<xt:arcId>ID</xt:arcId>...][<xt:prop name="N" value="V"/>...]</xt:tapeAdmin>\\n
    <xt:tapeRecord xmlns:xt="urn:xmltape:1.0"><xt:recordAdmin><xt:identifier>ID</xt:identifier><xt:date>YYYY-MM-DDThh:mm:ssZ</xt:date>[<xt:prop name="N" value="V"/>...]</xt:recordAdmin><xt:record>PAYLOAD</xt:record></xt:tapeRecord>\\n
    ...
    </xt:tape>\\n

Each record container redeclares the tape namespace so that its bytes parse on
their own. The tape elements use a prefix and never a default namespace, so
unprefixed names inside a payload mean the same thing inside the tape as they
do standalone.
"""

import re
from typing import Iterable, Tuple
from xml.sax.saxutils import escape

from model.tape_models import TapeAdmin, TapeRecordAdmin

NS = "urn:xmltape:1.0"
PREFIX = "xt"

TAPE = "tape"
TAPE_ADMIN = "tapeAdmin"
TAPE_ID = "tapeId"
ARC_ID = "arcId"
PROP = "prop"
TAPE_RECORD = "tapeRecord"
RECORD_ADMIN = "recordAdmin"
IDENTIFIER = "identifier"
DATE = "date"
RECORD = "record"

PAYLOAD_DIGEST = "payloadDigest"

PROLOG = b'<?xml version="1.0" encoding="UTF-8"?>\n'
TAPE_OPEN = f'<{PREFIX}:{TAPE} xmlns:{PREFIX}="{NS}">\n'.encode("utf-8")
TAPE_CLOSE = f"</{PREFIX}:{TAPE}>\n".encode("utf-8")
RECORD_SEPARATOR = b"\n"

_ATTRIBUTE_ENTITIES = {'"': "&quot;", "\n": "&#10;", "\r": "&#13;", "\t": "&#9;"}
_XML_ILLEGAL_RE = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\ufffe\uffff]")


def check_text(value: str, what: str) -> str:
    """
    Raises:
        ValueError: If the value is empty or holds characters XML 1.0 cannot carry.
    """
    if not isinstance(value, str) or not value:
        raise ValueError(f"{what} must be a non-empty string")
    if _XML_ILLEGAL_RE.search(value):
        raise ValueError(f"{what} {value!r} contains characters that cannot appear in XML")
    return value


def _tag(name: str) -> str:
    return f"{PREFIX}:{name}"


def _element(name: str, text: str) -> str:
    return f"<{_tag(name)}>{escape(text)}</{_tag(name)}>"


def _props(properties: Iterable[Tuple[str, str]]) -> str:
    return "".join(
        f'<{_tag(PROP)} name="{escape(name, _ATTRIBUTE_ENTITIES)}" value="{escape(value, _ATTRIBUTE_ENTITIES)}"/>'
        for name, value in properties
    )


def serialize_tape_head(admin: TapeAdmin) -> bytes:
    """
    Prolog, root start tag and the tape-level administrative section.
    """
    for name, value in admin.provenance:
        check_text(name, "Property name")
        check_text(value, "Property value")
    parts = [_element(TAPE_ID, str(admin.tape_id))]
    parts.extend(_element(ARC_ID, str(arc_id)) for arc_id in admin.arc_ids)
    parts.append(_props(admin.provenance))
    section = f"<{_tag(TAPE_ADMIN)}>{''.join(parts)}</{_tag(TAPE_ADMIN)}>\n"
    return PROLOG + TAPE_OPEN + section.encode("utf-8")


def serialize_record(admin: TapeRecordAdmin, payload: bytes) -> bytes:
    """
    One record container, without the separator that follows it.
    """
    check_text(admin.record_id, "Record identifier")
    for name, value in admin.properties:
        check_text(name, "Property name")
        check_text(value, "Property value")
    head = (
        f'<{_tag(TAPE_RECORD)} xmlns:{PREFIX}="{NS}">'
        f"<{_tag(RECORD_ADMIN)}>"
        f"{_element(IDENTIFIER, admin.record_id)}"
        f"{_element(DATE, admin.datestamp)}"
        f"{_props(admin.properties)}"
        f"</{_tag(RECORD_ADMIN)}>"
        f"<{_tag(RECORD)}>"
    )
    tail = f"</{_tag(RECORD)}></{_tag(TAPE_RECORD)}>"
    return head.encode("utf-8") + payload + tail.encode("utf-8")
