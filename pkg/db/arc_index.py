"""
The per-ARC-file index, keyed by Datastream Identifier.
"""

from pathlib import Path
from typing import Optional, Union

from arc_tools.reader import scan_arc
from lib.fsutil import file_digest
from lib.logger import logger
from lib.store_path import id_index_path
from model.storage_models import IndexEntry

from .index_file import read_index, write_index
from .tape_index import IdIndex


def build_arc_index(source) -> IdIndex:
    """
    Build the datastream index of an ARC file.

    Args:
        source: A write-time record log (`ArcWriter.records`) or the ARC file itself,
            which is then scanned. The version block is never indexed; ordinals count
            it, so the first datastream has ordinal 1.

    Raises:
        DuplicateKeyError: If a datastream identifier occurs twice.
        ScanError: If the file has to be scanned and is malformed.
    """
    if isinstance(source, (list, tuple)):
        records = source
    else:
        records = scan_arc(source)
    return IdIndex(
        IndexEntry(key=header.url, extent=extent, datestamp=header.archive_date, ordinal=ordinal)
        for ordinal, (header, extent) in enumerate(records)
        if not header.is_version_block
    )


def persist_arc_index(arc_path: Union[str, Path], index: IdIndex, digest: Optional[str] = None) -> Path:
    path = write_index(id_index_path(arc_path), arc_path, "id", index.entries, digest)
    logger.info("Wrote index of %s (%d entries)", Path(arc_path).name, len(index))
    return path


def load_arc_index(arc_path: Union[str, Path], verify: bool = True, digest: Optional[str] = None) -> IdIndex:
    """
    Raises:
        StaleIndexError: If the index is missing, malformed or stale.
    """
    if verify and digest is None:
        digest = file_digest(arc_path)
    _, entries = read_index(id_index_path(arc_path), arc_path if verify else None, digest)
    return IdIndex(entries)

