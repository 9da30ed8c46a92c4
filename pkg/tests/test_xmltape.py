import io
from datetime import datetime, timedelta, timezone

import pytest
from defusedxml import ElementTree as SafeElementTree

from db import build_tape_indexes, persist_tape_indexes
from identifiers import NamespaceClass, mint
from lib.fsutil import file_digest
from lib.errors import CorruptExtentError, DuplicateKeyError, PayloadError, ScanError, SealedError, WriteOnceViolationError
from model.tape_models import TapeAdmin, TapeRecord, TapeRecordAdmin
from tape_tools import (
    NS,
    PAYLOAD_DIGEST,
    check_payload,
    create_tape,
    parse_record_container,
    read_record_at,
    read_tape_admin,
    scan_tape,
    serialize_tape_head,
    validate_tape,
)

CREATED = datetime(2024, 5, 17, 8, 0, 0, tzinfo=timezone.utc)

PAYLOADS = [
    b'<m:doc xmlns:m="urn:example:m"><m:title>plain</m:title></m:doc>',
    # CDATA holding the text of a record end tag
    b'<m:doc xmlns:m="urn:example:m"><![CDATA[</xt:record></xt:tapeRecord>]]></m:doc>',
    b'<a:x xmlns:a="urn:a"><b:y xmlns:b="urn:b"><c:z xmlns:c="urn:c" c:attr="&gt;&quot;"/></b:y></a:x>',
    '<m:doc xmlns:m="urn:example:m">Grüße <!-- comment --> ✓</m:doc>'.encode("utf-8"),
    b'<doc xmlns="urn:example:default"><child/></doc>',
]


def write_tape(payloads=PAYLOADS, digest_payloads=False, arcs=1):
    buffer = io.BytesIO()
    admin = TapeAdmin(tape_id=mint(NamespaceClass.TAPE), arc_ids=[mint(NamespaceClass.ARC) for _ in range(arcs)],
                      provenance=[("software", "test & <suite>")])
    writer = create_tape(admin, buffer, digest_payloads=digest_payloads)
    for i, payload in enumerate(payloads):
        writer.append_record(TapeRecord(
            admin=TapeRecordAdmin(record_id=str(mint(NamespaceClass.PACKAGE)), created=CREATED + timedelta(seconds=i)),
            payload=payload,
        ))
    writer.seal()
    return buffer.getvalue(), writer


def test_sealed_tape_is_well_formed_for_an_independent_parser():
    data, writer = write_tape()
    root = SafeElementTree.fromstring(data)
    assert root.tag == f"{{{NS}}}tape"
    assert len(root.findall(f"{{{NS}}}tapeRecord")) == len(writer.records) == len(PAYLOADS)


def test_tape_layout_starts_with_prolog_and_admin():
    data, writer = write_tape()
    assert data.startswith(b'<?xml version="1.0" encoding="UTF-8"?>\n<xt:tape xmlns:xt="urn:xmltape:1.0">\n')
    assert data.endswith(b"</xt:tape>\n")
    assert f"<xt:tapeId>{writer.tape_id}</xt:tapeId>".encode() in data


def test_scan_matches_write_time_extents():
    data, writer = write_tape()
    scan = scan_tape(data)
    assert scan.records == writer.records
    assert scan.admin == writer.admin


def test_payloads_come_back_verbatim():
    data, writer = write_tape()
    for scanned, payload in zip(writer.records, PAYLOADS):
        record = read_record_at(data, scanned.extent)
        assert record.payload == payload
        assert record.admin.datestamp == scanned.admin.datestamp


def test_record_container_parses_standalone():
    data, writer = write_tape()
    extent = writer.records[2].extent
    record = parse_record_container(data[extent.offset:extent.end])
    assert record.payload == PAYLOADS[2]


@pytest.mark.parametrize("delta", [-1, 1])
def test_shifted_extents_are_corrupt(delta):
    data, writer = write_tape()
    for scanned in writer.records:
        with pytest.raises(CorruptExtentError):
            read_record_at(data, scanned.extent.shifted(delta))


@pytest.mark.parametrize("change", [(0, -1), (0, 1), (-1, 0), (1, 0)])
def test_resized_extents_are_corrupt(change):
    data, writer = write_tape()
    offset_delta, length_delta = change
    extent = writer.records[1].extent
    with pytest.raises(CorruptExtentError):
        read_record_at(data, type(extent)(offset=extent.offset + offset_delta, length=extent.length + length_delta))


def test_extent_outside_file():
    data, writer = write_tape()
    extent = writer.records[-1].extent
    with pytest.raises(CorruptExtentError):
        read_record_at(data, type(extent)(offset=extent.offset, length=len(data)))


def test_payload_rules():
    with pytest.raises(PayloadError):
        check_payload(b'<?xml version="1.0"?><m:doc xmlns:m="urn:m"/>')
    with pytest.raises(PayloadError):
        check_payload(b'<m:doc xmlns:m="urn:m"/><m:doc xmlns:m="urn:m"/>')
    with pytest.raises(PayloadError):
        check_payload(b"<doc/>")
    with pytest.raises(PayloadError):
        check_payload(b'<m:doc xmlns:m="urn:m">')
    with pytest.raises(PayloadError):
        check_payload(b' <m:doc xmlns:m="urn:m"/>')
    assert check_payload(b"<doc/>", require_namespace=False) == b"<doc/>"


def test_duplicate_record_identifier_and_sealing():
    buffer = io.BytesIO()
    writer = create_tape(TapeAdmin(tape_id=mint(NamespaceClass.TAPE)), buffer)
    admin = TapeRecordAdmin(record_id=str(mint(NamespaceClass.PACKAGE)), created=CREATED)
    writer.append_record(TapeRecord(admin=admin, payload=PAYLOADS[0]))
    with pytest.raises(DuplicateKeyError):
        writer.append_record(TapeRecord(admin=admin, payload=PAYLOADS[1]))
    writer.seal()
    with pytest.raises(SealedError):
        writer.seal()


def test_write_once_destination(tmp_path):
    path = tmp_path / "tape.xml"
    path.write_bytes(b"<x/>")
    with pytest.raises(WriteOnceViolationError):
        create_tape(TapeAdmin(tape_id=mint(NamespaceClass.TAPE)), path)


def test_empty_tape_is_valid():
    data, _ = write_tape(payloads=[], arcs=0)
    scan = scan_tape(data)
    assert scan.records == []
    assert validate_tape(data).ok


def test_read_tape_admin_stops_after_admin_section():
    data, writer = write_tape()
    head = data[:data.index(b"<xt:tapeRecord")]
    assert read_tape_admin(head) == writer.admin


def test_unclosed_tape_fails_scan_with_ordinal():
    data, writer = write_tape()
    cut = writer.records[3].extent.offset + 20
    with pytest.raises(ScanError) as info:
        scan_tape(data[:cut])
    assert info.value.record_ordinal == 3


def test_validate_reports_flipped_payload_byte_by_digest():
    data, writer = write_tape(digest_payloads=True)
    assert all(record.admin.get_property(PAYLOAD_DIGEST) for record in writer.records)
    position = data.index(b"plain")
    flipped = data[:position] + b"P" + data[position + 1:]
    report = validate_tape(flipped, "flipped.xml")
    assert [(f.code, f.record_ordinal) for f in report.findings] == [("digest-mismatch", 0)]


def test_validate_reports_broken_markup_with_ordinal():
    data, writer = write_tape()
    extent = writer.records[2].extent
    position = data.index(b"<b:y", extent.offset)
    broken = data[:position] + b"<" + data[position + 1:].replace(b"b:y", b"b:q", 1)
    report = validate_tape(broken, "broken.xml")
    assert not report.ok
    assert any(f.record_ordinal == 2 for f in report.findings)


def test_validate_reports_missing_admin_element():
    data, writer = write_tape()
    extent = writer.records[1].extent
    container = data[extent.offset:extent.end]
    start = container.index(b"<xt:date>")
    end = container.index(b"</xt:date>") + len(b"</xt:date>")
    patched = data[:extent.offset] + container[:start] + container[end:] + data[extent.end:]
    report = validate_tape(patched, "patched.xml")
    assert ("missing-admin-element", 1) in [(f.code, f.record_ordinal) for f in report.findings]


def sealed_tape_file(tmp_path):
    """A sealed tape on disk with the identifier and datetime indexes written at sealing."""
    data, writer = write_tape(digest_payloads=True)
    path = tmp_path / "tape.xml"
    path.write_bytes(data)
    persist_tape_indexes(path, *build_tape_indexes(writer.records))
    return path, writer


def flip_inside_record(path, writer, ordinal, old, new):
    data = path.read_bytes()
    extent = writer.records[ordinal].extent
    position = data.index(old, extent.offset, extent.end)
    path.write_bytes(data[:position] + new + data[position + len(old):])


def test_sealed_tape_with_index_is_valid(tmp_path):
    path, _ = sealed_tape_file(tmp_path)
    assert validate_tape(path, "tape.xml").ok


def test_validate_reports_flipped_identifier_digit(tmp_path):
    path, writer = sealed_tape_file(tmp_path)
    record_id = writer.records[1].admin.record_id
    last = record_id[-1]
    replacement = "0" if last != "0" else "1"
    flip_inside_record(path, writer, 1, record_id.encode(), (record_id[:-1] + replacement).encode())
    report = validate_tape(path, "tape.xml")
    assert [(f.code, f.record_ordinal) for f in report.findings] == [("file-digest-mismatch", None),
                                                                     ("index-mismatch", 1)]
    assert "key" in report.findings[1].message


def test_validate_reports_flipped_date_digit(tmp_path):
    path, writer = sealed_tape_file(tmp_path)
    flip_inside_record(path, writer, 1, b"08:00:01Z", b"08:00:51Z")
    report = validate_tape(path, "tape.xml")
    assert [(f.code, f.record_ordinal) for f in report.findings] == [("file-digest-mismatch", None),
                                                                     ("index-mismatch", 1)]
    assert "datestamp" in report.findings[1].message


def test_position_after_create_is_the_header_length():
    buffer = io.BytesIO()
    admin = TapeAdmin(tape_id=mint(NamespaceClass.TAPE), arc_ids=[mint(NamespaceClass.ARC)],
                      provenance=[("software", "tests")])
    writer = create_tape(admin, buffer)
    assert writer.position == len(buffer.getvalue()) == len(serialize_tape_head(admin))
    writer.append_record(TapeRecord(
        admin=TapeRecordAdmin(record_id=str(mint(NamespaceClass.PACKAGE)), created=CREATED),
        payload=PAYLOADS[0],
    ))
    head_length = len(serialize_tape_head(admin))
    writer.seal()
    assert scan_tape(buffer.getvalue()).records[0].extent.offset == head_length


def test_reads_leave_the_tape_unchanged(tmp_path):
    path, writer = sealed_tape_file(tmp_path)
    before = file_digest(path)
    for record in writer.records:
        read_record_at(path, record.extent)
    scan_tape(path)
    validate_tape(path, "tape.xml")
    assert file_digest(path) == before
