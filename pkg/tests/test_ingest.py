from datetime import datetime, timezone

import pytest

from arc_tools import read_record, scan_arc
from conftest import make_metadata, make_object, make_objects, write_object_dir
from db import load_arc_index, load_tape_indexes
from ingest_tools import BatchIngestor, clean_metadata, load_batch, make_openurl, make_wrapper, parse_wrapper
from ingest_tools import ingestor as ingestor_module
from identifiers import NamespaceClass, mint
from lib.errors import BatchLayoutError, IngestIOError, InvalidBaseUrlError, InvalidSubmissionError, PayloadError
from lib.fsutil import file_digest, publish
from locator.identifier_locator import IdentifierLocator
from model.ingest_models import DatastreamRef, IngestConfig, SubmissionDatastream, SubmissionObject
from tape_tools import read_record_at, read_tape_admin, validate_tape
from arc_tools import validate_arc


def wrappers(report):
    id_index, _ = load_tape_indexes(report.tape_path)
    return [parse_wrapper(read_record_at(report.tape_path, id_index.lookup_id(str(obj.package_id)).extent).payload)
            for obj in report.objects]


def test_report_lists_one_tape_and_every_object(ingested):
    report, objects = ingested
    assert report.tape_path.is_file()
    assert [obj.content_id for obj in report.objects] == [obj.content_id for obj in objects]
    assert all(len(obj.ds_ids) == 2 for obj in report.objects)
    assert len({str(obj.package_id) for obj in report.objects}) == len(objects)
    assert all(path.is_file() for path in report.arc_paths + report.index_paths)


def test_manifest_lines(ingested):
    report, _ = ingested
    lines = report.to_manifest().splitlines()
    assert lines[0] == f"# tape {report.tape_id}"
    assert lines[1:1 + len(report.arc_ids)] == [f"# arc {arc_id}" for arc_id in report.arc_ids]
    first = report.objects[0]
    assert lines[1 + len(report.arc_ids)] == (
        f"{first.content_id}\t{first.package_id}\t{first.ds_ids[0]},{first.ds_ids[1]}")


def test_tape_admin_names_the_arc_files(ingested):
    report, objects = ingested
    admin = read_tape_admin(report.tape_path)
    assert admin.tape_id == report.tape_id
    assert admin.arc_ids == report.arc_ids
    provenance = dict(admin.provenance)
    assert provenance["objectCount"] == str(len(objects))
    assert provenance["software"] == ingestor_module.SOFTWARE


def test_wrappers_hold_metadata_verbatim_and_reference_datastreams(ingested, ingest_config):
    report, objects = ingested
    for wrapper, obj, submission in zip(wrappers(report), report.objects, objects):
        assert wrapper.package_id == obj.package_id
        assert wrapper.content_id == submission.content_id
        assert wrapper.metadata == submission.metadata
        assert [ref.ds_id for ref in wrapper.datastreams] == obj.ds_ids
        for ref, datastream in zip(wrapper.datastreams, submission.datastreams):
            assert ref.openurl == make_openurl(ingest_config.openurl_base(ref.arc_id), ref.ds_id)
            arc_path = report.arc_paths[report.arc_ids.index(ref.arc_id)]
            header, data = read_record(arc_path, load_arc_index(arc_path).lookup_id(str(ref.ds_id)).extent)
            assert data == datastream.data
            assert header.content_type == datastream.media_type


def test_creation_datetimes_never_decrease(ingested):
    report, _ = ingested
    stamps = [obj.created for obj in report.objects]
    assert stamps == sorted(stamps)
    assert all(stamp.microsecond == 0 for stamp in stamps)


def test_committed_files_validate(ingested):
    report, _ = ingested
    assert validate_tape(report.tape_path).ok
    assert all(validate_arc(path).ok for path in report.arc_paths)


def test_locator_knows_every_object(ingested, store, ingest_config):
    report, _ = ingested
    locator = IdentifierLocator(store.locator_log, ingest_config.oai_base_template)
    for obj in report.objects:
        (version,) = locator.resolve_versions(obj.content_id)
        assert version.package_id == obj.package_id
        assert version.oai_base_url == ingest_config.oai_base(report.tape_id)


def test_staging_is_cleaned_up(ingested, store):
    assert list(store.staging.iterdir()) == []


def test_rollover_keeps_arc_files_small(store, clock):
    config = IngestConfig(clock=clock, max_arc_bytes=600)
    report = BatchIngestor(store, config).ingest_batch(make_objects(6, datastreams=3, size=100))
    assert len(report.arc_ids) > 1
    for path in report.arc_paths:
        datastreams = len(scan_arc(path)) - 1
        assert datastreams >= 1
        assert path.stat().st_size <= 600 or datastreams == 1
    assert sum(len(load_arc_index(path)) for path in report.arc_paths) == 18


def test_oversized_datastream_gets_its_own_arc(store, clock):
    config = IngestConfig(clock=clock, max_arc_bytes=300)
    report = BatchIngestor(store, config).ingest_batch([make_object(0, datastreams=2, size=1000)])
    assert len(report.arc_ids) == 2


def test_objects_without_datastreams_need_no_arc(store, clock):
    report = BatchIngestor(store, IngestConfig(clock=clock)).ingest_batch(make_objects(3, datastreams=0))
    assert report.arc_ids == []
    assert read_tape_admin(report.tape_path).arc_ids == []


def test_invalid_object_rejects_the_whole_batch(store, clock):
    objects = make_objects(3)
    objects.append(SubmissionObject(content_id="not a uri", metadata=make_metadata(3)))
    objects.append(SubmissionObject(content_id="info:test/x", metadata=b"<unclosed>"))
    with pytest.raises(InvalidSubmissionError) as info:
        BatchIngestor(store, IngestConfig(clock=clock)).ingest_batch(objects)
    assert len(info.value.problems) == 2
    assert store.visible_files() == []


def test_bad_media_type_is_rejected(store, clock):
    bad = SubmissionObject(content_id="info:test/x", metadata=make_metadata(0),
                           datastreams=[SubmissionDatastream(media_type="no type", data=b"x")])
    with pytest.raises(InvalidSubmissionError):
        BatchIngestor(store, IngestConfig(clock=clock)).ingest_batch([bad])
    assert store.visible_files() == []


def test_empty_batch_is_rejected(store, clock):
    with pytest.raises(InvalidSubmissionError):
        BatchIngestor(store, IngestConfig(clock=clock)).ingest_batch([])


def test_failed_publish_leaves_nothing_visible(store, clock, monkeypatch):
    def failing_publish(src, dst):
        if str(dst).endswith(".xml"):
            raise OSError("disk full")
        publish(src, dst)

    monkeypatch.setattr(ingestor_module, "publish", failing_publish)
    with pytest.raises(IngestIOError):
        BatchIngestor(store, IngestConfig(clock=clock)).ingest_batch(make_objects(2))
    assert store.visible_files() == []
    assert list(store.staging.iterdir()) == []


def test_reingest_adds_a_second_version(store, clock):
    ingestor = BatchIngestor(store, IngestConfig(clock=clock))
    first = ingestor.ingest_batch([make_object(0)])
    sealed = {path: file_digest(path) for path in [first.tape_path, *first.arc_paths, *first.index_paths]}
    second = ingestor.ingest_batch([make_object(0)])
    assert first.tape_id != second.tape_id
    versions = ingestor.locator.resolve_versions("info:test/object-0")
    assert [v.package_id for v in versions] == [first.objects[0].package_id, second.objects[0].package_id]
    assert first.tape_path.is_file() and second.tape_path.is_file()
    assert {path: file_digest(path) for path in sealed} == sealed


def test_make_openurl():
    ds_id = mint(NamespaceClass.DATASTREAM)
    encoded = str(ds_id).replace(":", "%3A").replace("/", "%2F")
    assert make_openurl("http://h:8080/openurl/a", ds_id) == (
        f"http://h:8080/openurl/a?url_ver=Z39.88-2004&rft_id={encoded}")
    assert make_openurl("https://h/resolve?arc=a", ds_id) == (
        f"https://h/resolve?arc=a&url_ver=Z39.88-2004&rft_id={encoded}")
    with pytest.raises(InvalidBaseUrlError):
        make_openurl("ftp://h/openurl", ds_id)
    with pytest.raises(InvalidBaseUrlError):
        make_openurl("/relative", ds_id)


def test_wrapper_keeps_metadata_bytes_and_reference_order():
    submission = SubmissionObject(
        content_id='info:test/"quoted"&more',
        metadata=b'<m xmlns="urn:m" a="&lt;">text <![CDATA[<raw>]]></m>',
        datastreams=[SubmissionDatastream(media_type="text/plain", data=b"a"),
                     SubmissionDatastream(media_type="image/png", data=b"b")],
    )
    arc_id = mint(NamespaceClass.ARC)
    refs = [DatastreamRef(ds_id=mint(NamespaceClass.DATASTREAM), arc_id=arc_id, media_type=ds.media_type,
                          openurl=f"http://h/openurl/x?url_ver=Z39.88-2004&rft_id={n}")
            for n, ds in enumerate(submission.datastreams)]
    package_id = mint(NamespaceClass.PACKAGE)
    created = datetime(2024, 2, 29, 23, 59, 59, tzinfo=timezone.utc)
    wrapper = parse_wrapper(make_wrapper(submission, refs, package_id, created))
    assert wrapper.metadata == submission.metadata
    assert wrapper.content_id == submission.content_id
    assert wrapper.package_id == package_id
    assert wrapper.created == created
    assert wrapper.datastreams == refs


def test_wrapper_needs_one_reference_per_datastream():
    submission = make_object(0)
    with pytest.raises(InvalidSubmissionError):
        make_wrapper(submission, [], mint(NamespaceClass.PACKAGE), datetime(2024, 1, 1, tzinfo=timezone.utc))


def test_parse_wrapper_rejects_other_documents():
    with pytest.raises(PayloadError):
        parse_wrapper(b'<x:object xmlns:x="urn:other"/>')


def test_clean_metadata():
    raw = b'\xef\xbb\xbf<?xml version="1.0" encoding="UTF-8"?>\n  <m xmlns="urn:m"/>\n'
    assert clean_metadata(raw) == b'<m xmlns="urn:m"/>'



def test_load_batch_orders_objects_and_datastreams(tmp_path):
    batch = tmp_path / "batch"
    write_object_dir(batch / "b", "info:test/b")
    write_object_dir(batch / "a", "info:test/a", datastreams=(
        ("10.bin", b"ten", "application/octet-stream"),
        ("2.pdf", b"two", "application/pdf"),
    ))
    (batch / ".hidden").mkdir()
    objects = load_batch(batch)
    assert [obj.content_id for obj in objects] == ["info:test/a", "info:test/b"]
    assert [ds.read() for ds in objects[0].datastreams] == [b"two", b"ten"]
    assert [ds.media_type for ds in objects[0].datastreams] == ["application/pdf", "application/octet-stream"]
    assert objects[0].metadata == b'<m xmlns="urn:m">x</m>'


def test_load_batch_layout_errors(tmp_path):
    with pytest.raises(BatchLayoutError):
        load_batch(tmp_path / "missing")

    batch = tmp_path / "no-media-type"
    write_object_dir(batch / "a", "info:test/a")
    (batch / "a" / "1.txt.mediatype").unlink()
    with pytest.raises(BatchLayoutError):
        load_batch(batch)

    batch = tmp_path / "bad-name"
    write_object_dir(batch / "a", "info:test/a")
    (batch / "a" / "notes.txt").write_text("x", encoding="utf-8")
    with pytest.raises(BatchLayoutError):
        load_batch(batch)

    batch = tmp_path / "no-content-id"
    write_object_dir(batch / "a", "info:test/a")
    (batch / "a" / "content.id").unlink()
    with pytest.raises(BatchLayoutError):
        load_batch(batch)
