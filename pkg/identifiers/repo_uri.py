"""
Repository identifiers.

Four classes of identifiers are minted by the repository, all UUID based and
expressed as URIs below the `info:lanl-repo/` namespace:

    info:lanl-repo/pkg/<uuid>       Package Identifier (one wrapper document)
    info:lanl-repo/xmltape/<uuid>   XMLtape Identifier
    info:lanl-repo/arc/<uuid>       ARC file Identifier
    info:lanl-repo/ds/<uuid>        Datastream Identifier

Content Identifiers are supplied by information providers, stored verbatim
and never minted.
"""

import re
import uuid
from enum import Enum
from typing import Union

from pydantic import BaseModel, ConfigDict

from lib.errors import InvalidClassError, MalformedIdentifierError

PREFIX = "info:lanl-repo/"
_HEX = frozenset("0123456789abcdef")
_HYPHENS = (8, 13, 18, 23)
_UUID_LENGTH = 36
_CONTENT_ID_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:\S+$")


class NamespaceClass(str, Enum):
    """The five classes of identifiers."""

    CONTENT = "content"
    PACKAGE = "package"
    TAPE = "tape"
    ARC = "arc"
    DATASTREAM = "datastream"


SUBNAMESPACES = {
    NamespaceClass.PACKAGE: "pkg",
    NamespaceClass.TAPE: "xmltape",
    NamespaceClass.ARC: "arc",
    NamespaceClass.DATASTREAM: "ds",
}
_CLASS_BY_TOKEN = {token: cls for cls, token in SUBNAMESPACES.items()}


class RepoUri(BaseModel):
    """
    A minted repository identifier.

    Attributes:
        namespace_class (NamespaceClass): Package, tape, ARC or datastream.
        uuid (uuid.UUID): The 128-bit UUID.
    """

    model_config = ConfigDict(frozen=True)

    namespace_class: NamespaceClass
    uuid: uuid.UUID

    def render(self) -> str:
        return f"{PREFIX}{SUBNAMESPACES[self.namespace_class]}/{self.uuid}"

    @property
    def uuid_str(self) -> str:
        return str(self.uuid)

    def __str__(self) -> str:
        return self.render()


def _class_of(value: Union[str, NamespaceClass]) -> NamespaceClass:
    try:
        return NamespaceClass(value)
    except ValueError:
        raise InvalidClassError(f"Unknown identifier class {value!r}") from None


def mint(namespace_class: NamespaceClass) -> RepoUri:
    """
    Mint a fresh identifier from a random (version 4) UUID.

    Raises:
        InvalidClassError: For unknown classes and for content identifiers, which are never minted.
    """
    namespace_class = _class_of(namespace_class)
    if namespace_class not in SUBNAMESPACES:
        raise InvalidClassError(f"Identifiers of class {namespace_class.value!r} are never minted")
    return RepoUri(namespace_class=namespace_class, uuid=uuid.uuid4())


def parse(value: Union[str, bytes]) -> RepoUri:
    """
    Parse the rendering of a minted identifier.

    Accepts any input; everything that does not match the grammar exactly
    (case-sensitive sub-namespace, canonical lowercase UUID) is rejected.

    Raises:
        MalformedIdentifierError: Carrying the position of the first offending character.
    """
    if isinstance(value, (bytes, bytearray)):
        try:
            text = bytes(value).decode("ascii")
        except UnicodeDecodeError as exc:
            raise MalformedIdentifierError(bytes(value).decode("ascii", "replace"), exc.start,
                                           "non-ASCII byte") from exc
    elif isinstance(value, str):
        text = value
    else:
        raise MalformedIdentifierError(repr(value), 0, "not a string")

    for position, expected in enumerate(PREFIX):
        if position >= len(text) or text[position] != expected:
            raise MalformedIdentifierError(text, position, f"expected prefix {PREFIX!r}")

    start = len(PREFIX)
    slash = text.find("/", start)
    token = text[start:slash] if slash >= 0 else text[start:]
    if slash < 0 or token not in _CLASS_BY_TOKEN:
        common = max(_common_prefix(token, candidate) for candidate in _CLASS_BY_TOKEN)
        if slash < 0 and token in _CLASS_BY_TOKEN:
            common = len(token)
        raise MalformedIdentifierError(
            text, start + common, f"sub-namespace must be one of {sorted(_CLASS_BY_TOKEN)}"
        )

    uuid_start = slash + 1
    candidate = text[uuid_start:]
    for offset in range(min(len(candidate), _UUID_LENGTH)):
        char = candidate[offset]
        if offset in _HYPHENS:
            if char != "-":
                raise MalformedIdentifierError(text, uuid_start + offset, "expected '-' in UUID")
        elif char not in _HEX:
            raise MalformedIdentifierError(text, uuid_start + offset, "expected lowercase hex digit")
    if len(candidate) != _UUID_LENGTH:
        raise MalformedIdentifierError(
            text, uuid_start + min(len(candidate), _UUID_LENGTH), "UUID must have 36 characters"
        )
    return RepoUri(namespace_class=_CLASS_BY_TOKEN[token], uuid=uuid.UUID(candidate))


def parse_as(value: Union[str, bytes, RepoUri], namespace_class: NamespaceClass) -> RepoUri:
    """
    Parse an identifier and require a specific class.

    Raises:
        MalformedIdentifierError: If the input is malformed.
        InvalidClassError: If it is well-formed but of another class.
    """
    uri = value if isinstance(value, RepoUri) else parse(value)
    expected = _class_of(namespace_class)
    if uri.namespace_class != expected:
        raise InvalidClassError(
            f"{uri.render()} is a {uri.namespace_class.value} identifier, expected {expected.value}"
        )
    return uri


def from_uuid(namespace_class: NamespaceClass, value: Union[str, uuid.UUID, RepoUri]) -> RepoUri:
    """
    Accept either a full identifier or the bare UUID of one (as used in URL paths).
    """
    if isinstance(value, RepoUri):
        return parse_as(value, namespace_class)
    text = str(value)
    if text.startswith(PREFIX):
        return parse_as(text, namespace_class)
    return parse_as(f"{PREFIX}{SUBNAMESPACES[_class_of(namespace_class)]}/{text}", namespace_class)


def validate_content_identifier(value: str) -> str:
    """
    Check a provider supplied Content Identifier and return it unchanged.

    Raises:
        MalformedIdentifierError: If it is empty or not of the form `scheme:remainder`.
    """
    if not isinstance(value, str) or not value:
        raise MalformedIdentifierError(str(value), 0, "content identifier must not be empty")
    if not _CONTENT_ID_RE.match(value):
        position = value.find(":") if ":" in value else len(value)
        raise MalformedIdentifierError(value, max(position, 0), "content identifier must be an absolute URI")
    return value


def _common_prefix(left: str, right: str) -> int:
    count = 0
    for a, b in zip(left, right):
        if a != b:
            break
        count += 1
    return count
