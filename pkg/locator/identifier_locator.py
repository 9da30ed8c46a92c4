"""
A minimal Identifier Locator: Content Identifier -> every version of the object.

The mapping is persisted as an append-only tab-separated log,

    content_id<TAB>package_id<TAB>tape_id<TAB>created<LF>

replayed into memory at start-up. Appends are serialized by a lock; readers
use an immutable snapshot that is swapped after every successful append.
"""

import os
import threading
from pathlib import Path
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Tuple, Union

from identifiers import NamespaceClass, parse_as
from lib.datestamp import DateFormat
from lib.errors import LocatorConflictError
from lib.logger import logger
from model.ingest_models import TAPE_PLACEHOLDER
from model.locator_models import ResolvedVersion, VersionEntry

Snapshot = Mapping[str, Tuple[VersionEntry, ...]]


def _version_key(entry: VersionEntry):
    return entry.created, str(entry.package_id).encode("utf-8")


def parse_log_line(line: str) -> VersionEntry:
    fields = line.split("\t")
    if len(fields) != 4:
        raise ValueError(f"expected 4 tab-separated fields, found {len(fields)}")
    content_id, package_id, tape_id, created = fields
    if not content_id:
        raise ValueError("empty content identifier")
    return VersionEntry(
        content_id=content_id,
        package_id=parse_as(package_id, NamespaceClass.PACKAGE),
        tape_id=parse_as(tape_id, NamespaceClass.TAPE),
        created=DateFormat.parse(created),
    )


class IdentifierLocator:
    """
    Append-only Content Identifier -> versions mapping.

    Args:
        log_path: File holding the append-only log; created on first registration.
        oai_base_template (str): Base URL of a tape's OAI-PMH repository, with `{tape_uuid}`.
    """

    def __init__(self, log_path: Union[str, Path], oai_base_template: str):
        if oai_base_template.count(TAPE_PLACEHOLDER) != 1:
            raise ValueError(f"oai_base_template must contain {TAPE_PLACEHOLDER} exactly once")
        self.log_path = Path(log_path)
        self.oai_base_template = oai_base_template
        self._lock = threading.Lock()
        self._needs_newline = False
        self._snapshot: Snapshot = self._replay()

    # --------------------------------------------------------------------------
    # Persistence
    # --------------------------------------------------------------------------

    def _replay(self) -> Snapshot:
        versions: Dict[str, List[VersionEntry]] = {}
        if not self.log_path.exists():
            return MappingProxyType({})
        data = self.log_path.read_bytes()
        lines = data.split(b"\n")
        if lines and lines[-1]:
            logger.warning("Ignoring incomplete last line of %s", self.log_path)
            self._needs_newline = True
        for number, raw in enumerate(lines[:-1], start=1):
            if not raw:
                continue
            try:
                entry = parse_log_line(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError) as exc:
                logger.warning("Skipping malformed line %d of %s: %s", number, self.log_path, exc)
                continue
            bucket = versions.setdefault(entry.content_id, [])
            same = [known for known in bucket if known.package_id == entry.package_id]
            if same and same[0] != entry:
                logger.warning("Ignoring line %d of %s: %s is already logged for %s on %s at %s",
                               number, self.log_path, entry.package_id, entry.content_id, same[0].tape_id,
                               DateFormat.format(same[0].created))
                continue
            if not same:
                bucket.append(entry)
        logger.info("Replayed locator log %s: %d content identifiers", self.log_path, len(versions))
        return MappingProxyType({key: tuple(sorted(value, key=_version_key)) for key, value in versions.items()})

    def reload(self) -> int:
        """
        Replay the log again, picking up registrations made by other processes.

        Returns:
            int: Number of registered versions afterwards.
        """
        with self._lock:
            self._needs_newline = False
            self._snapshot = self._replay()
        return len(self)

    def _append(self, entries: List[VersionEntry]) -> None:
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        payload = "".join(entry.to_line() + "\n" for entry in entries).encode("utf-8")
        if self._needs_newline:
            payload = b"\n" + payload
        with open(self.log_path, "ab") as fd:
            fd.write(payload)
            fd.flush()
            os.fsync(fd.fileno())
        self._needs_newline = False

    # --------------------------------------------------------------------------
    # Registration
    # --------------------------------------------------------------------------

    def register(self, entry: VersionEntry) -> None:
        """
        Record one version durably; exact duplicates are ignored.

        Raises:
            LocatorConflictError: If the (content_id, package_id) pair is known with another tape or datetime.
        """
        self.register_many([entry])

    def register_many(self, entries: Iterable[VersionEntry]) -> None:
        """
        Record several versions with one durable append, all or none.
        """
        with self._lock:
            snapshot = self._snapshot
            pending: List[VersionEntry] = []
            for entry in entries:
                if any(char in entry.content_id for char in "\t\r\n") or not entry.content_id:
                    raise LocatorConflictError(f"Content identifier {entry.content_id!r} cannot be logged")
                known = list(snapshot.get(entry.content_id, ())) + [e for e in pending if e.content_id == entry.content_id]
                same = [e for e in known if e.package_id == entry.package_id]
                if same:
                    if same[0] != entry:
                        raise LocatorConflictError(
                            f"{entry.package_id} is already registered for {entry.content_id} "
                            f"on {same[0].tape_id} at {DateFormat.format(same[0].created)}"
                        )
                    continue
                pending.append(entry)
            if not pending:
                return
            self._append(pending)
            updated = dict(snapshot)
            for entry in pending:
                updated[entry.content_id] = tuple(sorted(updated.get(entry.content_id, ()) + (entry,),
                                                         key=_version_key))
            self._snapshot = MappingProxyType(updated)
        logger.info("Registered %d versions in %s", len(pending), self.log_path)

    # --------------------------------------------------------------------------
    # Resolution
    # --------------------------------------------------------------------------

    def oai_base_url(self, tape_id) -> str:
        tape_uri = parse_as(tape_id, NamespaceClass.TAPE)
        return self.oai_base_template.replace(TAPE_PLACEHOLDER, tape_uri.uuid_str)

    def versions(self, content_id: str) -> Tuple[VersionEntry, ...]:
        return self._snapshot.get(content_id, ())

    def resolve_versions(self, content_id: str) -> List[ResolvedVersion]:
        """
        Every registered version of an object, oldest first (ties by Package Identifier).

        Returns:
            List[ResolvedVersion]: Empty for unknown Content Identifiers.
        """
        return [
            ResolvedVersion(
                package_id=entry.package_id,
                tape_id=entry.tape_id,
                oai_base_url=self.oai_base_url(entry.tape_id),
                created=entry.created,
            )
            for entry in self.versions(content_id)
        ]

    def __len__(self) -> int:
        return sum(len(versions) for versions in self._snapshot.values())
