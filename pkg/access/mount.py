"""
Mounting a store root for the access layer.

A mount is an immutable snapshot of every sealed tape and ARC file found
below the store root, each with its verified indexes loaded. Requests only
ever read the current snapshot; `refresh()` builds a new one and swaps it in.
Files whose size and modification time did not change since the previous
snapshot are carried over without re-hashing.
"""

import os
import threading
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Dict, Mapping, Optional

from db.arc_index import load_arc_index
from db.tape_index import DatetimeIndex, IdIndex, load_tape_indexes
from identifiers import NamespaceClass, RepoUri, from_uuid
from lib.errors import KeyNotFoundError, MalformedIdentifierError, ScanError, StaleIndexError
from lib.fsutil import file_digest
from lib.logger import logger
from lib.store_path import StorePath
from model.tape_models import TapeAdmin
from tape_tools.reader import read_tape_admin


@dataclass(frozen=True)
class MountedTape:
    """
    A sealed tape ready for OAI-PMH requests.

    Attributes:
        tape_id (RepoUri): XMLtape Identifier, taken from the tape's admin section.
        path (Path): The tape file.
        digest (str): xxh3_128 digest of the tape; resumption tokens carry a prefix of it.
        admin (TapeAdmin): Tape-level administrative information.
        id_index (IdIndex): Record identifier -> extent.
        dt_index (DatetimeIndex): Creation datetime -> extent.
    """

    tape_id: RepoUri
    path: Path
    digest: str
    admin: TapeAdmin
    id_index: IdIndex
    dt_index: DatetimeIndex
    size: int
    mtime_ns: int


@dataclass(frozen=True)
class MountedArc:
    """
    A sealed ARC file ready for OpenURL requests.
    """

    arc_id: RepoUri
    path: Path
    digest: str
    index: IdIndex
    size: int
    mtime_ns: int


@dataclass(frozen=True)
class MountSnapshot:
    """
    Everything mounted at one moment, keyed by UUID string.
    """

    tapes: Mapping[str, MountedTape]
    arcs: Mapping[str, MountedArc]


_EMPTY = MountSnapshot(tapes=MappingProxyType({}), arcs=MappingProxyType({}))


def _unchanged(previous, stat: os.stat_result) -> bool:
    return previous is not None and previous.size == stat.st_size and previous.mtime_ns == stat.st_mtime_ns


def mount_tape(path: Path, previous: Optional[MountedTape] = None) -> MountedTape:
    """
    Load one tape with verified indexes.

    Raises:
        StaleIndexError: If an index is missing or does not describe the tape.
        ScanError: If the admin section cannot be read.
        MalformedIdentifierError: If the file name is not the tape's UUID.
    """
    stat = path.stat()
    if _unchanged(previous, stat):
        return previous
    digest = file_digest(path)
    admin = read_tape_admin(path)
    if admin.tape_id != from_uuid(NamespaceClass.TAPE, path.stem):
        raise MalformedIdentifierError(path.name, 0, f"file name does not match {admin.tape_id}")
    id_index, dt_index = load_tape_indexes(path, verify=True, digest=digest)
    return MountedTape(
        tape_id=admin.tape_id,
        path=path,
        digest=digest,
        admin=admin,
        id_index=id_index,
        dt_index=dt_index,
        size=stat.st_size,
        mtime_ns=stat.st_mtime_ns,
    )


def mount_arc(path: Path, previous: Optional[MountedArc] = None) -> MountedArc:
    """
    Load one ARC file with its verified index.

    Raises:
        StaleIndexError: If the index is missing or does not describe the file.
        MalformedIdentifierError: If the file name is not a UUID.
    """
    stat = path.stat()
    if _unchanged(previous, stat):
        return previous
    digest = file_digest(path)
    return MountedArc(
        arc_id=from_uuid(NamespaceClass.ARC, path.stem),
        path=path,
        digest=digest,
        index=load_arc_index(path, verify=True, digest=digest),
        size=stat.st_size,
        mtime_ns=stat.st_mtime_ns,
    )


class StoreMount:
    """
    The sealed files of one store root, as seen by the access layer.

    Args:
        store (StorePath): The store root to mount.
    """

    def __init__(self, store: StorePath):
        self.store = store
        self._lock = threading.Lock()
        self._snapshot: MountSnapshot = _EMPTY

    @property
    def snapshot(self) -> MountSnapshot:
        return self._snapshot

    def refresh(self) -> MountSnapshot:
        """
        Re-discover sealed files and swap in a new snapshot.

        Files with missing or stale indexes are skipped with a warning.
        """
        with self._lock:
            previous = self._snapshot
            tapes: Dict[str, MountedTape] = {}
            for path in self.store.sealed_tapes():
                try:
                    tape = mount_tape(path, previous.tapes.get(path.stem))
                except (StaleIndexError, ScanError, MalformedIdentifierError, OSError) as exc:
                    logger.warning("Not mounting tape %s: %s", path.name, exc)
                    continue
                tapes[tape.tape_id.uuid_str] = tape
            arcs: Dict[str, MountedArc] = {}
            for path in self.store.sealed_arcs():
                try:
                    arc = mount_arc(path, previous.arcs.get(path.stem))
                except (StaleIndexError, MalformedIdentifierError, OSError) as exc:
                    logger.warning("Not mounting ARC file %s: %s", path.name, exc)
                    continue
                arcs[arc.arc_id.uuid_str] = arc
            self._snapshot = MountSnapshot(tapes=MappingProxyType(tapes), arcs=MappingProxyType(arcs))
        logger.info("Mounted %s: %d tapes, %d ARC files", self.store.root, len(tapes), len(arcs))
        return self._snapshot

    def tape(self, tape_uuid: str) -> MountedTape:
        """
        Raises:
            KeyNotFoundError: If no tape with this UUID is mounted.
        """
        try:
            return self._snapshot.tapes[tape_uuid]
        except KeyError:
            raise KeyNotFoundError(f"No mounted tape {tape_uuid}") from None

    def arc(self, arc_uuid: str) -> MountedArc:
        """
        Raises:
            KeyNotFoundError: If no ARC file with this UUID is mounted.
        """
        try:
            return self._snapshot.arcs[arc_uuid]
        except KeyError:
            raise KeyNotFoundError(f"No mounted ARC file {arc_uuid}") from None
