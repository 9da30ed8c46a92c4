"""
index_file.py

Reads and writes the portable, line-oriented index files that sit next to
every sealed tape and ARC file.

Features:
- One header line recording the target file's name, size and digest, so a
  reader can tell whether the index still describes the file.
- One UTF-8 line per entry: `key<TAB>offset<TAB>length<TAB>datestamp<TAB>ordinal<LF>`.
- Atomic writes (temporary name, then rename), so a crash never leaves half an index.

Example header:

    #xmltape-index v1 target=<file name> size=<bytes> xxh3_128=<hex> kind=id
"""

import os
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from lib.datestamp import DateFormat
from lib.errors import StaleIndexError
from lib.fsutil import DIGEST_ALGORITHM, file_digest, write_atomic
from lib.logger import logger
from model.storage_models import ByteExtent, IndexEntry, ValidationFinding

MAGIC = "#xmltape-index"
VERSION = "v1"
KINDS = ("id", "dt")


class IndexHeader:
    """
    The first line of an index file.
    """

    TEMPLATE = "{magic} {version} target={target} size={size} {algorithm}={digest} kind={kind}\n"

    def __init__(self, target: str, size: int, digest: str, kind: str):
        if kind not in KINDS:
            raise ValueError(f"Unknown index kind {kind!r}")
        if any(char.isspace() for char in target):
            raise ValueError(f"Index target name {target!r} contains whitespace")
        self.target = target
        self.size = size
        self.digest = digest
        self.kind = kind

    def render(self) -> str:
        return self.TEMPLATE.format(magic=MAGIC, version=VERSION, target=self.target, size=self.size,
                                    algorithm=DIGEST_ALGORITHM, digest=self.digest, kind=self.kind)

    @classmethod
    def parse(cls, line: str) -> "IndexHeader":
        parts = line.rstrip("\n").split(" ")
        if len(parts) != 6 or parts[0] != MAGIC or parts[1] != VERSION:
            raise ValueError(f"Not an index header: {line!r}")
        fields: Dict[str, str] = {}
        for part in parts[2:]:
            name, sep, value = part.partition("=")
            if not sep:
                raise ValueError(f"Malformed index header field {part!r}")
            fields[name] = value
        try:
            return cls(fields["target"], int(fields["size"]), fields[DIGEST_ALGORITHM], fields["kind"])
        except (KeyError, ValueError) as exc:
            raise ValueError(f"Incomplete index header: {line!r}") from exc

    def describes(self, target: Path, digest: Optional[str] = None) -> bool:
        """
        True when `target` still has the recorded size and digest.
        """
        try:
            size = os.path.getsize(target)
        except OSError:
            return False
        if size != self.size:
            return False
        return (digest or file_digest(target)) == self.digest


def render_entry(entry: IndexEntry) -> str:
    if any(char in entry.key for char in "\t\n\r"):
        raise ValueError(f"Index key {entry.key!r} contains a tab or line break")
    return "\t".join([
        entry.key,
        str(entry.extent.offset),
        str(entry.extent.length),
        DateFormat.format(entry.datestamp),
        str(entry.ordinal),
    ]) + "\n"


def parse_entry(line: str) -> IndexEntry:
    fields = line.rstrip("\n").split("\t")
    if len(fields) != 5:
        raise ValueError(f"Expected 5 tab-separated fields: {line!r}")
    key, offset, length, datestamp, ordinal = fields
    return IndexEntry(
        key=key,
        extent=ByteExtent(offset=int(offset), length=int(length)),
        datestamp=DateFormat.parse(datestamp),
        ordinal=int(ordinal),
    )


def render_index(header: IndexHeader, entries: Iterable[IndexEntry]) -> bytes:
    return (header.render() + "".join(render_entry(entry) for entry in entries)).encode("utf-8")


def write_index(path: Union[str, Path], target: Union[str, Path], kind: str,
                entries: Iterable[IndexEntry], digest: Optional[str] = None) -> Path:
    """
    Write an index file for `target` atomically; `entries` must already be in index order.

    Args:
        digest (Optional[str]): Digest of the target when the caller already computed it.
    """
    target = Path(target)
    header = IndexHeader(target.name, os.path.getsize(target), digest or file_digest(target), kind)
    write_atomic(path, render_index(header, entries))
    return Path(path)


def read_index(path: Union[str, Path], target: Optional[Union[str, Path]] = None,
               digest: Optional[str] = None) -> Tuple[IndexHeader, List[IndexEntry]]:
    """
    Load an index file, verifying it against `target` when one is given.

    Raises:
        StaleIndexError: If the file is missing or malformed, or no longer describes the target.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8", newline="\n") as fd:
            header = IndexHeader.parse(fd.readline())
            entries = [parse_entry(line) for line in fd if line.strip()]
    except OSError as exc:
        raise StaleIndexError(f"Cannot read index {path}: {exc}") from exc
    except ValueError as exc:
        raise StaleIndexError(f"Malformed index {path}: {exc}") from exc
    if target is not None:
        target = Path(target)
        if header.target != target.name or not header.describes(target, digest):
            raise StaleIndexError(f"Index {path} does not describe the current bytes of {target}")
    return header, entries


def compare_with_index(path: Union[str, Path], target: Union[str, Path], entries: Sequence[IndexEntry],
                       digest: Optional[str] = None) -> List[ValidationFinding]:
    """
    Compare a fresh scan of `target` with the index written when it was sealed.

    The index header pins the target's size and digest at seal time; when the
    target no longer matches, every entry whose key, extent or datestamp differs
    from the scan is reported with its ordinal. No index file means nothing to
    compare against.

    Args:
        path: The index file (`<target>.idx.id`).
        entries (Sequence[IndexEntry]): Entries rebuilt from a scan of the target.
        digest (Optional[str]): Digest of the target when the caller already computed it.

    Returns:
        List[ValidationFinding]: Empty when the target still has its sealed bytes.
    """
    path, target = Path(path), Path(target)
    if not path.is_file():
        return []
    try:
        header, recorded = read_index(path)
    except StaleIndexError as exc:
        logger.warning("Skipping unreadable index %s: %s", path, exc)
        return []
    if header.describes(target, digest):
        return []

    findings = [ValidationFinding(
        code="file-digest-mismatch",
        message=f"{target.name} no longer has the size and digest recorded in {path.name}",
    )]
    sealed = {entry.ordinal: entry for entry in recorded}
    scanned = {entry.ordinal: entry for entry in entries}
    for ordinal in sorted(set(sealed) | set(scanned)):
        before, now = sealed.get(ordinal), scanned.get(ordinal)
        if before == now:
            continue
        if before is None or now is None:
            message = "record is missing from the scan" if now is None else "record is missing from the index"
        else:
            changed = [name for name in ("key", "extent", "datestamp") if getattr(before, name) != getattr(now, name)]
            message = f"{', '.join(changed)} changed since sealing (indexed {before.key} at {before.extent})"
        findings.append(ValidationFinding(
            code="index-mismatch",
            message=message,
            record_ordinal=ordinal,
            offset=(now or before).extent.offset,
        ))
    return findings
