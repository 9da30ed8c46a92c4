import os
import random
import tempfile
from datetime import datetime, timedelta, timezone
from typing import List

os.environ.setdefault("XMLTAPE_LOG_DIR", tempfile.gettempdir())

import pytest

from ingest_tools.ingestor import BatchIngestor
from lib.store_path import StorePath
from model.ingest_models import IngestConfig, SubmissionDatastream, SubmissionObject

START = datetime(2024, 1, 1, tzinfo=timezone.utc)


class StepClock:
    """Deterministic clock advancing by `step` on every call."""

    def __init__(self, start: datetime = START, step: timedelta = timedelta(seconds=1)):
        self.now = start
        self.step = step

    def __call__(self) -> datetime:
        value = self.now
        self.now += self.step
        return value


def make_metadata(i: int) -> bytes:
    return (f'<dc:dc xmlns:dc="http://purl.org/dc/elements/1.1/">'
            f"<dc:title>Object {i} &amp; friends</dc:title></dc:dc>").encode("utf-8")


def make_object(i: int, datastreams: int = 2, size: int = 64, prefix: str = "info:test/object-") -> SubmissionObject:
    rng = random.Random(i)
    return SubmissionObject(
        content_id=f"{prefix}{i}",
        metadata=make_metadata(i),
        datastreams=[
            SubmissionDatastream(media_type="application/octet-stream", data=rng.randbytes(size + n))
            for n in range(datastreams)
        ],
    )


def make_objects(count: int, datastreams: int = 2, size: int = 64) -> List[SubmissionObject]:
    return [make_object(i, datastreams, size) for i in range(count)]


@pytest.fixture
def clock() -> StepClock:
    return StepClock()


@pytest.fixture
def store(tmp_path) -> StorePath:
    return StorePath(tmp_path / "store")


@pytest.fixture
def ingest_config(clock) -> IngestConfig:
    return IngestConfig(clock=clock)


@pytest.fixture
def objects() -> List[SubmissionObject]:
    return make_objects(12)


@pytest.fixture
def ingested(store, ingest_config, objects):
    """A store holding one committed batch; yields the report and the submitted objects."""
    report = BatchIngestor(store, ingest_config).ingest_batch(objects)
    return report, objects


def write_object_dir(directory, content_id, datastreams=(("1.txt", b"one", "text/plain"),)):
    """Lay out one object directory of a batch on disk."""
    directory.mkdir(parents=True)
    (directory / "content.id").write_text(content_id + "\n", encoding="utf-8")
    (directory / "metadata.xml").write_bytes(b'<?xml version="1.0"?>\n<m xmlns="urn:m">x</m>\n')
    for name, data, media_type in datastreams:
        (directory / name).write_bytes(data)
        (directory / f"{name}.mediatype").write_text(media_type + "\n", encoding="utf-8")
