from .index_file import (
    IndexHeader,
    compare_with_index,
    read_index,
    write_index,
)
from .tape_index import (
    IdIndex,
    DatetimeIndex,
    lookup_id,
    range_by_datetime,
    build_tape_indexes,
    persist_tape_indexes,
    load_tape_indexes,
)
from .arc_index import (
    build_arc_index,
    persist_arc_index,
    load_arc_index,
)

__all__ = [
    "IndexHeader",
    "compare_with_index",
    "read_index",
    "write_index",
    "IdIndex",
    "DatetimeIndex",
    "lookup_id",
    "range_by_datetime",
    "build_tape_indexes",
    "persist_tape_indexes",
    "load_tape_indexes",
    "build_arc_index",
    "persist_arc_index",
    "load_arc_index",
]
