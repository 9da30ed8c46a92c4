"""
Loads a batch directory into submission objects.

Layout, one sub-directory per object, processed in name order:

    <batch>/<object>/content.id          the Content Identifier, one line
    <batch>/<object>/metadata.xml        one XML element; a leading XML declaration
                                         and surrounding whitespace are dropped
    <batch>/<object>/<n>[.<ext>]         datastream number n (decimal, orders them)
    <batch>/<object>/<n>[.<ext>].mediatype   its media type, one line

Names starting with a dot are ignored everywhere.
"""

import re
from pathlib import Path
from typing import Dict, List, Union

from lib.errors import BatchLayoutError
from lib.logger import logger
from model.ingest_models import SubmissionDatastream, SubmissionObject

CONTENT_ID_FILE = "content.id"
METADATA_FILE = "metadata.xml"
MEDIATYPE_SUFFIX = ".mediatype"

_DATASTREAM_RE = re.compile(r"^(\d+)(\.[^/]+)?$")
_XML_DECLARATION_RE = re.compile(rb"^<\?xml[^>]*\?>")


def clean_metadata(raw: bytes) -> bytes:
    """
    Drop a byte order mark, a leading XML declaration and surrounding whitespace.
    """
    data = raw[3:] if raw.startswith(b"\xef\xbb\xbf") else raw
    data = data.strip()
    data = _XML_DECLARATION_RE.sub(b"", data, count=1)
    return data.strip()


def _read_line(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8").strip()
    except UnicodeDecodeError as exc:
        raise BatchLayoutError(f"{path} is not UTF-8 text") from exc


def load_object(directory: Union[str, Path]) -> SubmissionObject:
    """
    Load one object directory; datastream bytes stay on disk until written.

    Raises:
        BatchLayoutError: If a mandatory file is missing or a file name does not fit the layout.
    """
    directory = Path(directory)
    content_id_path = directory / CONTENT_ID_FILE
    metadata_path = directory / METADATA_FILE
    for required in (content_id_path, metadata_path):
        if not required.is_file():
            raise BatchLayoutError(f"{directory.name}: missing {required.name}")

    datastreams: Dict[int, Path] = {}
    media_types: Dict[str, str] = {}
    for entry in sorted(directory.iterdir()):
        name = entry.name
        if name.startswith(".") or name in (CONTENT_ID_FILE, METADATA_FILE):
            continue
        if not entry.is_file():
            raise BatchLayoutError(f"{directory.name}: unexpected directory {name}")
        if name.endswith(MEDIATYPE_SUFFIX):
            media_types[name[:-len(MEDIATYPE_SUFFIX)]] = _read_line(entry)
            continue
        match = _DATASTREAM_RE.match(name)
        if not match:
            raise BatchLayoutError(f"{directory.name}: {name} is not a datastream file name (<n> or <n>.<ext>)")
        number = int(match.group(1))
        if number in datastreams:
            raise BatchLayoutError(f"{directory.name}: datastream number {number} is used twice")
        datastreams[number] = entry

    orphans = set(media_types) - {path.name for path in datastreams.values()}
    if orphans:
        raise BatchLayoutError(f"{directory.name}: media type sidecars without datastream: {sorted(orphans)}")
    submission_streams = []
    for number in sorted(datastreams):
        path = datastreams[number]
        if path.name not in media_types:
            raise BatchLayoutError(f"{directory.name}: {path.name} has no {path.name}{MEDIATYPE_SUFFIX}")
        submission_streams.append(SubmissionDatastream(media_type=media_types[path.name], path=path))

    return SubmissionObject(
        content_id=_read_line(content_id_path),
        metadata=clean_metadata(metadata_path.read_bytes()),
        datastreams=submission_streams,
    )


def load_batch(directory: Union[str, Path]) -> List[SubmissionObject]:
    """
    Load every object directory of a batch, in name order.

    Returns:
        List[SubmissionObject]: Possibly empty; an empty batch is for the caller to reject.

    Raises:
        BatchLayoutError: If the batch directory is missing or does not follow the layout.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise BatchLayoutError(f"Batch directory {directory} does not exist")
    objects = []
    for entry in sorted(directory.iterdir()):
        if entry.name.startswith("."):
            continue
        if not entry.is_dir():
            raise BatchLayoutError(f"Unexpected file {entry.name} in batch directory")
        objects.append(load_object(entry))
    logger.info("Loaded %d objects from %s", len(objects), directory)
    return objects
