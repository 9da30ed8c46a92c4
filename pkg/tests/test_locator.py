from datetime import datetime, timedelta, timezone

import pytest

from identifiers import NamespaceClass, mint
from lib.errors import LocatorConflictError
from locator.identifier_locator import IdentifierLocator, parse_log_line
from model.locator_models import VersionEntry

TEMPLATE = "http://repo.example/oai/{tape_uuid}"
T0 = datetime(2024, 6, 1, 10, 0, 0, tzinfo=timezone.utc)


def entry(content_id="info:test/a", created=T0, tape_id=None, package_id=None):
    return VersionEntry(
        content_id=content_id,
        package_id=package_id or mint(NamespaceClass.PACKAGE),
        tape_id=tape_id or mint(NamespaceClass.TAPE),
        created=created,
    )


@pytest.fixture
def log_path(tmp_path):
    return tmp_path / "locator.log"


def test_unknown_content_id_resolves_to_nothing(log_path):
    locator = IdentifierLocator(log_path, TEMPLATE)
    assert locator.resolve_versions("info:test/unknown") == []
    assert not log_path.exists()


def test_versions_are_oldest_first_with_oai_base_urls(log_path):
    locator = IdentifierLocator(log_path, TEMPLATE)
    later = entry(created=T0 + timedelta(days=1))
    earlier = entry(created=T0)
    locator.register(later)
    locator.register(earlier)
    versions = locator.resolve_versions("info:test/a")
    assert [v.package_id for v in versions] == [earlier.package_id, later.package_id]
    assert versions[0].oai_base_url == f"http://repo.example/oai/{earlier.tape_id.uuid_str}"
    assert versions[0].to_json_dict()["created"] == "2024-06-01T10:00:00Z"


def test_same_second_versions_are_ordered_by_package_id(log_path):
    locator = IdentifierLocator(log_path, TEMPLATE)
    entries = [entry() for _ in range(5)]
    locator.register_many(entries)
    assert [str(v.package_id) for v in locator.resolve_versions("info:test/a")] == sorted(
        str(e.package_id) for e in entries)


def test_registration_is_idempotent(log_path):
    locator = IdentifierLocator(log_path, TEMPLATE)
    first = entry()
    locator.register(first)
    size = log_path.stat().st_size
    locator.register(first)
    assert log_path.stat().st_size == size
    assert len(locator) == 1


def test_conflicting_registration_is_rejected(log_path):
    locator = IdentifierLocator(log_path, TEMPLATE)
    first = entry()
    locator.register(first)
    with pytest.raises(LocatorConflictError):
        locator.register(entry(package_id=first.package_id, created=T0 + timedelta(seconds=1)))
    with pytest.raises(LocatorConflictError):
        locator.register(entry(content_id="info:test/with\ttab"))
    assert len(locator) == 1


def test_registrations_survive_a_restart(log_path):
    locator = IdentifierLocator(log_path, TEMPLATE)
    registered = [entry(content_id=f"info:test/{i}") for i in range(3)]
    locator.register_many(registered)
    replayed = IdentifierLocator(log_path, TEMPLATE)
    assert len(replayed) == 3
    assert replayed.versions("info:test/1") == (registered[1],)


def test_incomplete_last_line_is_ignored_and_repaired(log_path):
    locator = IdentifierLocator(log_path, TEMPLATE)
    kept = entry()
    locator.register(kept)
    with open(log_path, "ab") as fd:
        fd.write(kept.to_line().encode("utf-8")[:20])
    replayed = IdentifierLocator(log_path, TEMPLATE)
    assert len(replayed) == 1
    added = entry(content_id="info:test/b")
    replayed.register(added)
    again = IdentifierLocator(log_path, TEMPLATE)
    assert again.versions("info:test/b") == (added,)
    assert again.versions("info:test/a") == (kept,)


def test_malformed_lines_are_skipped(log_path):
    kept = entry()
    log_path.write_text("garbage\n" + kept.to_line() + "\nx\ty\tz\tw\n", encoding="utf-8")
    assert IdentifierLocator(log_path, TEMPLATE).versions("info:test/a") == (kept,)


def test_reload_picks_up_other_writers(log_path):
    reader = IdentifierLocator(log_path, TEMPLATE)
    IdentifierLocator(log_path, TEMPLATE).register(entry())
    assert len(reader) == 0
    assert reader.reload() == 1
    assert len(reader.resolve_versions("info:test/a")) == 1


def test_parse_log_line():
    original = entry()
    assert parse_log_line(original.to_line()) == original
    with pytest.raises(ValueError):
        parse_log_line("only\tthree\tfields")


def test_template_needs_tape_placeholder(log_path):
    with pytest.raises(ValueError):
        IdentifierLocator(log_path, "http://repo.example/oai/")


def test_conflicting_log_line_is_ignored_with_a_warning(log_path, caplog):
    first = entry()
    moved = entry(package_id=first.package_id, tape_id=mint(NamespaceClass.TAPE))
    log_path.write_text(first.to_line() + "\n" + moved.to_line() + "\n", encoding="utf-8")
    with caplog.at_level("WARNING", logger="xmltape"):
        locator = IdentifierLocator(log_path, TEMPLATE)
    assert locator.versions("info:test/a") == (first,)
    assert any("line 2" in record.getMessage() and str(first.package_id) in record.getMessage()
               for record in caplog.records)
