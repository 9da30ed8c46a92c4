"""
The two per-tape indexes: by record identifier and by creation datetime.

Both are built either from the extents a `TapeWriter` captured while writing
or from an independent `scan_tape`; the two sources give identical index files.
"""

from bisect import bisect_left, bisect_right
from datetime import datetime
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from lib.datestamp import DateFormat
from lib.errors import DuplicateKeyError, InvalidRangeError, KeyNotFoundError
from lib.fsutil import file_digest
from lib.logger import logger
from lib.store_path import dt_index_path, id_index_path
from model.storage_models import IndexEntry
from model.tape_models import ScannedRecord, TapeScan
from tape_tools.reader import scan_tape

from .index_file import read_index, write_index


class IdIndex:
    """
    Identifier-keyed index; entries are kept sorted by key bytes.
    """

    def __init__(self, entries: Iterable[IndexEntry]):
        self._by_key: Dict[str, IndexEntry] = {}
        for entry in entries:
            if entry.key in self._by_key:
                raise DuplicateKeyError(f"Duplicate index key {entry.key}")
            self._by_key[entry.key] = entry
        self.entries: List[IndexEntry] = sorted(self._by_key.values(), key=lambda e: e.key.encode("utf-8"))

    def lookup_id(self, key: str) -> IndexEntry:
        """
        Raises:
            KeyNotFoundError: If no entry has this key.
        """
        try:
            return self._by_key[key]
        except KeyError:
            raise KeyNotFoundError(f"No index entry for {key}") from None

    def __contains__(self, key: str) -> bool:
        return key in self._by_key

    def __len__(self) -> int:
        return len(self._by_key)

    def keys(self) -> List[str]:
        return [entry.key for entry in self.entries]


class DatetimeIndex:
    """
    Datetime-keyed index, ordered by (datestamp, ordinal).
    """

    def __init__(self, entries: Iterable[IndexEntry]):
        self.entries: List[IndexEntry] = sorted(entries, key=lambda e: (e.datestamp, e.ordinal))
        self._stamps: List[datetime] = [entry.datestamp for entry in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def earliest(self) -> Optional[datetime]:
        return self._stamps[0] if self._stamps else None

    def range_by_datetime(self, from_: Optional[datetime] = None,
                          until: Optional[datetime] = None) -> List[IndexEntry]:
        """
        Entries with `from_ <= datestamp <= until`, both bounds inclusive at seconds
        precision and open when omitted.

        Raises:
            InvalidRangeError: If `from_` is after `until`.
        """
        lower = DateFormat.truncate(from_) if from_ is not None else None
        upper = DateFormat.truncate(until) if until is not None else None
        if lower is not None and upper is not None and lower > upper:
            raise InvalidRangeError(f"from {DateFormat.format(lower)} is after until {DateFormat.format(upper)}")
        start = bisect_left(self._stamps, lower) if lower is not None else 0
        stop = bisect_right(self._stamps, upper) if upper is not None else len(self._stamps)
        return self.entries[start:stop]


def lookup_id(index: IdIndex, key: str) -> IndexEntry:
    return index.lookup_id(key)


def range_by_datetime(index: DatetimeIndex, from_: Optional[datetime] = None,
                      until: Optional[datetime] = None) -> List[IndexEntry]:
    return index.range_by_datetime(from_, until)


def entries_from_records(records: Sequence[ScannedRecord]) -> List[IndexEntry]:
    return [
        IndexEntry(key=record.admin.record_id, extent=record.extent, datestamp=record.admin.created, ordinal=ordinal)
        for ordinal, record in enumerate(records)
    ]


def build_tape_indexes(source: Union[TapeScan, Sequence[ScannedRecord], str, Path, bytes]
                       ) -> Tuple[IdIndex, DatetimeIndex]:
    """
    Build both indexes of a tape.

    Args:
        source: A write-time record log (`TapeWriter.records`), a `TapeScan`, or the tape
            itself, which is then scanned.

    Raises:
        DuplicateKeyError: If a record identifier occurs twice.
        ScanError: If the tape has to be scanned and is malformed.
    """
    if isinstance(source, TapeScan):
        records = source.records
    elif isinstance(source, (list, tuple)):
        records = source
    else:
        records = scan_tape(source).records
    entries = entries_from_records(records)
    return IdIndex(entries), DatetimeIndex(entries)


def persist_tape_indexes(tape_path: Union[str, Path], id_index: IdIndex, dt_index: DatetimeIndex,
                         digest: Optional[str] = None) -> Tuple[Path, Path]:
    """
    Write `<tape>.idx.id` and `<tape>.idx.dt` next to the tape.
    """
    digest = digest or file_digest(tape_path)
    id_path = write_index(id_index_path(tape_path), tape_path, "id", id_index.entries, digest)
    dt_path = write_index(dt_index_path(tape_path), tape_path, "dt", dt_index.entries, digest)
    logger.info("Wrote indexes of %s (%d entries)", Path(tape_path).name, len(id_index))
    return id_path, dt_path


def load_tape_indexes(tape_path: Union[str, Path], verify: bool = True,
                      digest: Optional[str] = None) -> Tuple[IdIndex, DatetimeIndex]:
    """
    Load both indexes of a tape, checking them against the tape's size and digest.

    Raises:
        StaleIndexError: If an index is missing, malformed or stale.
    """
    target = tape_path if verify else None
    if verify and digest is None:
        digest = file_digest(tape_path)
    _, id_entries = read_index(id_index_path(tape_path), target, digest)
    _, dt_entries = read_index(dt_index_path(tape_path), target, digest)
    return IdIndex(id_entries), DatetimeIndex(dt_entries)
