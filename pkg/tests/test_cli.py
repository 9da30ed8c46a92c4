import pytest

from conftest import write_object_dir
from db import load_tape_indexes
from lib.store_path import StorePath, dt_index_path, id_index_path
from pipeline import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from tape_tools import read_record_at


@pytest.fixture
def batch(tmp_path):
    directory = tmp_path / "batch"
    write_object_dir(directory / "001", "info:test/one", datastreams=(
        ("1.txt", b"first datastream\n", "text/plain"),
        ("2.bin", bytes(range(256)), "application/octet-stream"),
    ))
    write_object_dir(directory / "002", "info:test/two")
    return directory


@pytest.fixture
def store_root(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path / "store"


def run(capsysbinary, *argv):
    code = main([str(arg) for arg in argv])
    out, err = capsysbinary.readouterr()
    return code, out, err


@pytest.fixture
def manifest(batch, store_root, capsysbinary):
    code, out, _ = run(capsysbinary, "--store", store_root, "ingest", batch)
    assert code == EXIT_OK
    return out.decode("utf-8").splitlines()


def parsed_manifest(lines):
    tape = lines[0].split(" ")[2]
    arcs = [line.split(" ")[2] for line in lines if line.startswith("# arc ")]
    objects = [line.split("\t") for line in lines if not line.startswith("#")]
    return tape, arcs, objects


def test_ingest_prints_manifest(manifest):
    tape, arcs, objects = parsed_manifest(manifest)
    assert tape.startswith("info:lanl-repo/xmltape/")
    assert len(arcs) == 1
    assert [obj[0] for obj in objects] == ["info:test/one", "info:test/two"]
    assert len(objects[0][2].split(",")) == 2


def test_empty_batch_is_a_usage_error(tmp_path, store_root, capsysbinary):
    (tmp_path / "empty").mkdir()
    code, _, err = run(capsysbinary, "--store", store_root, "ingest", tmp_path / "empty")
    assert code == EXIT_USAGE
    assert b"no objects" in err


def test_validate_sealed_files(manifest, store_root, capsysbinary):
    store = StorePath(store_root)
    paths = store.sealed_tapes() + store.sealed_arcs()
    code, out, _ = run(capsysbinary, "validate", *paths)
    assert code == EXIT_OK
    lines = out.decode("utf-8").splitlines()
    assert [line.split("\t")[:2] for line in lines] == [["valid", "tape"], ["valid", "arc"]]


def test_validate_reports_damage(manifest, store_root, capsysbinary):
    (tape,) = StorePath(store_root).sealed_tapes()
    data = tape.read_bytes()
    tape.write_bytes(data[:-20])
    code, out, _ = run(capsysbinary, "validate", tape)
    assert code == EXIT_FAILURE
    assert out.startswith(b"invalid\ttape\t")


def test_reindex_rebuilds_identical_indexes(manifest, store_root, capsysbinary):
    store = StorePath(store_root)
    (tape,) = store.sealed_tapes()
    (arc,) = store.sealed_arcs()
    originals = {path: path.read_bytes() for path in (id_index_path(tape), dt_index_path(tape), id_index_path(arc))}
    for path in originals:
        path.unlink()
    code, out, _ = run(capsysbinary, "--store", store_root, "reindex")
    assert code == EXIT_OK
    assert len(out.decode("utf-8").splitlines()) == 3
    assert {path: path.read_bytes() for path in originals} == originals


def test_get_record_and_datastream(manifest, store_root, capsysbinary):
    tape_id, arcs, objects = parsed_manifest(manifest)
    tape_uuid = tape_id.rsplit("/", 1)[1]
    code, out, _ = run(capsysbinary, "--store", store_root, "get-record", tape_uuid, objects[0][1])
    assert code == EXIT_OK
    (tape,) = StorePath(store_root).sealed_tapes()
    id_index, _ = load_tape_indexes(tape)
    assert out == read_record_at(tape, id_index.lookup_id(objects[0][1]).extent).payload

    ds_ids = objects[0][2].split(",")
    code, out, _ = run(capsysbinary, "--store", store_root, "get-datastream", arcs[0], ds_ids[1])
    assert code == EXIT_OK
    assert out == bytes(range(256))


def test_lookup_failures(manifest, store_root, capsysbinary):
    tape_id, _, objects = parsed_manifest(manifest)
    tape_uuid = tape_id.rsplit("/", 1)[1]
    code, _, _ = run(capsysbinary, "--store", store_root, "get-record", tape_uuid, "info:lanl-repo/pkg/bad")
    assert code == EXIT_USAGE
    missing = "info:lanl-repo/pkg/00000000-0000-4000-8000-000000000000"
    code, _, _ = run(capsysbinary, "--store", store_root, "get-record", tape_uuid, missing)
    assert code == EXIT_FAILURE
    code, _, _ = run(capsysbinary, "--store", store_root, "get-record", "00000000-0000-4000-8000-000000000000",
                     objects[0][1])
    assert code == EXIT_FAILURE


def test_locate(manifest, store_root, capsysbinary):
    tape_id, _, objects = parsed_manifest(manifest)
    code, out, _ = run(capsysbinary, "--store", store_root, "locate", "info:test/two")
    assert code == EXIT_OK
    (line,) = out.decode("utf-8").splitlines()
    package_id, base_url, created = line.split("\t")
    assert package_id == objects[1][1]
    assert base_url == "http://127.0.0.1:8080/oai/" + tape_id.rsplit("/", 1)[1]
    code, _, _ = run(capsysbinary, "--store", store_root, "locate", "info:test/unknown")
    assert code == EXIT_FAILURE


def test_usage_errors(tmp_path, store_root, capsysbinary):
    assert run(capsysbinary, "--store", store_root, "frobnicate")[0] == EXIT_USAGE
    assert run(capsysbinary, "--config", tmp_path / "missing.env", "locate", "info:x/y")[0] == EXIT_USAGE
    assert run(capsysbinary, "--page-size", "0", "locate", "info:x/y")[0] == EXIT_USAGE


def test_validate_reports_flipped_identifier_with_ordinal(manifest, store_root, capsysbinary):
    _, _, objects = parsed_manifest(manifest)
    (tape,) = StorePath(store_root).sealed_tapes()
    package_id = objects[1][1].encode("ascii")
    data = tape.read_bytes()
    position = data.index(package_id) + len(package_id) - 1
    replacement = b"0" if data[position:position + 1] != b"0" else b"1"
    tape.write_bytes(data[:position] + replacement + data[position + 1:])
    code, out, _ = run(capsysbinary, "validate", tape)
    assert code == EXIT_FAILURE
    assert b"finding\tindex-mismatch\t1\t" in out


def test_validate_reports_flipped_datastream_byte(manifest, store_root, capsysbinary):
    (arc,) = StorePath(store_root).sealed_arcs()
    data = arc.read_bytes()
    position = data.index(b"first datastream")
    arc.write_bytes(data[:position] + b"F" + data[position + 1:])
    code, out, _ = run(capsysbinary, "validate", arc)
    assert code == EXIT_FAILURE
    assert b"finding\tfile-digest-mismatch\t" in out


def test_reindex_refuses_truncated_tape(manifest, store_root, capsysbinary):
    (tape,) = StorePath(store_root).sealed_tapes()
    index_before = id_index_path(tape).read_bytes()
    tape.write_bytes(tape.read_bytes()[:-40])
    code, _, err = run(capsysbinary, "--store", store_root, "reindex", tape)
    assert code == EXIT_FAILURE
    assert b"error:" in err
    assert id_index_path(tape).read_bytes() == index_before


def test_reindex_twice_gives_identical_files(manifest, store_root, capsysbinary):
    store = StorePath(store_root)
    paths = [index for target in store.sealed_tapes() + store.sealed_arcs()
             for index in (id_index_path(target), dt_index_path(target)) if index.exists()]
    assert run(capsysbinary, "--store", store_root, "reindex")[0] == EXIT_OK
    first = {path: path.read_bytes() for path in paths}
    assert run(capsysbinary, "--store", store_root, "reindex")[0] == EXIT_OK
    assert {path: path.read_bytes() for path in paths} == first


def test_ingest_with_malformed_metadata_writes_nothing(batch, store_root, capsysbinary):
    (batch / "002" / "metadata.xml").write_bytes(b"<m xmlns=\"urn:m\"><unclosed></m>")
    code, out, err = run(capsysbinary, "--store", store_root, "ingest", batch)
    assert code == EXIT_FAILURE
    assert out == b""
    assert b"info:test/two" in err
    written = list(store_root.rglob("*")) if store_root.exists() else []
    assert [path for path in written if path.is_file()] == []


def test_get_record_verifies_the_index_only_on_request(manifest, store_root, capsysbinary):
    tape_id, _, objects = parsed_manifest(manifest)
    tape_uuid = tape_id.rsplit("/", 1)[1]
    (tape,) = StorePath(store_root).sealed_tapes()
    with open(tape, "ab") as fd:
        fd.write(b"\n")
    code, out, _ = run(capsysbinary, "--store", store_root, "get-record", tape_uuid, objects[0][1])
    assert code == EXIT_OK
    assert out.startswith(b"<")
    code, _, err = run(capsysbinary, "--store", store_root, "get-record", "--verify", tape_uuid, objects[0][1])
    assert code == EXIT_FAILURE
    assert b"does not describe" in err
