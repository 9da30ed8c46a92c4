"""
OpenURL resolver over one mounted ARC file.

The only service offered is delivery of the datastream named by `rft_id` in a
KEV (key/encoded-value) OpenURL. Keys other than `url_ver` and `rft_id` are
ignored.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

from arc_tools.reader import read_record
from identifiers import NamespaceClass, parse_as
from lib.errors import CorruptRecordError, InvalidClassError, MalformedIdentifierError, OutOfBoundsError
from lib.logger import logger

from .mount import MountedArc

URL_VER = "Z39.88-2004"
MISSING_URL_VER_WARNING = f'299 - "url_ver missing, {URL_VER} assumed"'


@dataclass
class OpenUrlResponse:
    """
    What the resolver answers: an HTTP status, a body and its media type.
    """

    status: int
    body: bytes
    media_type: str = "text/plain"
    headers: Dict[str, str] = field(default_factory=dict)


def _error(status: int, message: str, headers: Optional[Dict[str, str]] = None) -> OpenUrlResponse:
    return OpenUrlResponse(status=status, body=(message + "\n").encode("utf-8"), headers=headers or {})


def _single(params: Sequence[Tuple[str, str]], key: str):
    values = [value for name, value in params if name == key]
    if len(values) > 1:
        raise ValueError(f"{key} is repeated")
    return values[0] if values else None


def handle_openurl(arc: MountedArc, params: Sequence[Tuple[str, str]], strict: bool = False) -> OpenUrlResponse:
    """
    Resolve one OpenURL against a mounted ARC file.

    Args:
        arc (MountedArc): The ARC file addressed by the request path.
        params: Decoded KEV pairs in request order.
        strict (bool): Reject requests without `url_ver` instead of warning.

    Returns:
        OpenUrlResponse: 200 with the datastream bytes and its stored media type,
            400 for a missing, repeated or malformed `rft_id` or a wrong `url_ver`,
            404 for a datastream this ARC file does not hold.
    """
    try:
        url_ver = _single(params, "url_ver")
        rft_id = _single(params, "rft_id")
    except ValueError as exc:
        return _error(400, str(exc))

    headers: Dict[str, str] = {}
    if url_ver is None:
        if strict:
            return _error(400, f"url_ver={URL_VER} is required")
        logger.warning("OpenURL for %s without url_ver", arc.arc_id)
        headers["Warning"] = MISSING_URL_VER_WARNING
    elif url_ver != URL_VER:
        return _error(400, f"Unsupported url_ver {url_ver!r}")

    if not rft_id:
        return _error(400, "rft_id is required", headers)
    try:
        ds_id = parse_as(rft_id, NamespaceClass.DATASTREAM)
    except (MalformedIdentifierError, InvalidClassError) as exc:
        return _error(400, f"rft_id is not a datastream identifier: {exc}", headers)

    key = str(ds_id)
    if key not in arc.index:
        return _error(404, f"{key} is not held by {arc.arc_id}", headers)
    try:
        header, data = read_record(arc.path, arc.index.lookup_id(key).extent)
    except (CorruptRecordError, OutOfBoundsError) as exc:
        logger.error("Cannot deliver %s from %s: %s", key, arc.path, exc)
        return _error(500, f"Datastream {key} cannot be read", headers)
    return OpenUrlResponse(status=200, body=data, media_type=header.content_type, headers=headers)
