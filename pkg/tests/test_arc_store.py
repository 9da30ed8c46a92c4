import io
from datetime import datetime, timezone

import pytest

from arc_tools import create_arc, read_record, scan_arc, validate_arc
from arc_tools.writer import VERSION_BLOCK_DATA
from identifiers import NamespaceClass, mint
from lib.errors import (
    CorruptRecordError,
    DuplicateKeyError,
    InvalidMediaTypeError,
    OutOfBoundsError,
    ScanError,
    SealedError,
    WriteOnceViolationError,
)
from lib.fsutil import file_digest
from model.storage_models import ByteExtent

CREATED = datetime(2024, 3, 1, 12, 30, 45, 999999, tzinfo=timezone.utc)


def write_arc(datastreams):
    buffer = io.BytesIO()
    writer = create_arc(mint(NamespaceClass.ARC), buffer, file_name="sample.arc", created=CREATED)
    ids = []
    for media_type, data in datastreams:
        ds_id = mint(NamespaceClass.DATASTREAM)
        writer.append_datastream(ds_id, media_type, data, CREATED)
        ids.append(ds_id)
    writer.seal()
    return buffer.getvalue(), writer, ids


def test_version_block_layout():
    data, _, _ = write_arc([])
    expected = (f"filedesc://sample.arc 0.0.0.0 20240301123045 text/plain {len(VERSION_BLOCK_DATA)}\n"
                .encode("ascii") + VERSION_BLOCK_DATA + b"\n")
    assert data == expected


def test_datastream_record_layout():
    data, _, (ds_id,) = write_arc([("image/png", b"\x89PNG\r\n")])
    assert data.endswith(f"{ds_id} 0.0.0.0 20240301123045 image/png 6\n".encode("ascii") + b"\x89PNG\r\n\n")


def test_write_time_extents_match_scan():
    data, writer, _ = write_arc([("text/plain", b"hello"), ("application/pdf", b""), ("text/xml", b"<a/>\n")])
    assert scan_arc(data) == writer.records
    assert writer.record_count == 3


def test_read_record_returns_exact_bytes():
    payloads = [("text/plain", b"hello"), ("application/octet-stream", bytes(range(256))), ("text/plain", b"")]
    data, writer, ids = write_arc(payloads)
    for (header, extent), ds_id, (media_type, payload) in zip(writer.records[1:], ids, payloads):
        read_header, read_data = read_record(data, extent)
        assert read_header.url == str(ds_id)
        assert read_header.content_type == media_type
        assert read_data == payload


@pytest.mark.parametrize("delta", [-1, 1])
def test_shifted_extent_is_detected(delta):
    data, writer, _ = write_arc([("text/plain", b"hello"), ("text/plain", b"world!")])
    for _, extent in writer.records[1:]:
        with pytest.raises(CorruptRecordError):
            read_record(data, extent.shifted(delta))


def test_extent_past_end_of_file():
    data, _, _ = write_arc([("text/plain", b"hello")])
    with pytest.raises(OutOfBoundsError):
        read_record(data, ByteExtent(offset=len(data) - 3, length=10))


def test_write_once_destinations(tmp_path):
    path = tmp_path / "existing.arc"
    path.write_bytes(b"x")
    with pytest.raises(WriteOnceViolationError):
        create_arc(mint(NamespaceClass.ARC), path)
    with pytest.raises(WriteOnceViolationError):
        create_arc(mint(NamespaceClass.ARC), io.BytesIO(b"not empty"))


def test_sealed_writer_refuses_appends_and_second_seal():
    _, writer, _ = write_arc([("text/plain", b"hello")])
    with pytest.raises(SealedError):
        writer.append_datastream(mint(NamespaceClass.DATASTREAM), "text/plain", b"late")
    with pytest.raises(SealedError):
        writer.seal()


def test_invalid_media_type_and_duplicate_identifier():
    writer = create_arc(mint(NamespaceClass.ARC), io.BytesIO())
    with pytest.raises(InvalidMediaTypeError):
        writer.append_datastream(mint(NamespaceClass.DATASTREAM), "text/plain; charset=utf-8", b"x")
    ds_id = mint(NamespaceClass.DATASTREAM)
    writer.append_datastream(ds_id, "text/plain", b"x")
    with pytest.raises(DuplicateKeyError):
        writer.append_datastream(ds_id, "text/plain", b"y")


def test_scan_detects_truncation_with_ordinal():
    data, _, _ = write_arc([("text/plain", b"hello"), ("text/plain", b"world!")])
    with pytest.raises(ScanError) as info:
        scan_arc(data[:-4])
    assert info.value.record_ordinal == 2


def test_scan_requires_version_block_first():
    data, writer, _ = write_arc([("text/plain", b"hello")])
    first = writer.records[1][1]
    with pytest.raises(ScanError) as info:
        scan_arc(data[first.offset:])
    assert info.value.record_ordinal == 0


def test_validate_reports_wrong_declared_length():
    data, _, _ = write_arc([("text/plain", b"hello"), ("text/plain", b"world!")])
    broken = data.replace(b" 5\nhello", b" 4\nhello", 1)
    report = validate_arc(broken, "broken.arc")
    assert not report.ok
    assert report.findings[0].code == "scan-error"
    assert report.findings[0].record_ordinal == 1


def test_validate_accepts_sealed_file():
    data, _, _ = write_arc([("text/plain", b"hello")])
    report = validate_arc(data, "sample.arc")
    assert report.ok
    assert report.record_count == 1
    assert report.to_lines()[0].startswith("valid\tarc\tsample.arc")


def test_reads_leave_the_file_unchanged(tmp_path):
    data, writer, _ = write_arc([("text/plain", b"hello"), ("application/octet-stream", bytes(range(256)))])
    path = tmp_path / "sample.arc"
    path.write_bytes(data)
    before = file_digest(path)
    for _, extent in writer.records[1:]:
        read_record(path, extent)
    scan_arc(path)
    validate_arc(path, "sample.arc")
    assert file_digest(path) == before
