from .factory import (
    WrapperFactory,
    WRAPPER_NS,
    make_openurl,
    make_wrapper,
    parse_wrapper,
)
from .batch_loader import (
    clean_metadata,
    load_object,
    load_batch,
)
from .ingestor import (
    BatchIngestor,
    ingest_batch,
)

__all__ = [
    "WrapperFactory",
    "WRAPPER_NS",
    "make_openurl",
    "make_wrapper",
    "parse_wrapper",
    "clean_metadata",
    "load_object",
    "load_batch",
    "BatchIngestor",
    "ingest_batch",
]
