import pytest

from access import oai_settings
from config import Config
from lib.errors import ConfigError
from model.ingest_models import DEFAULT_MAX_ARC_BYTES


def test_defaults():
    config = Config.load(environ={})
    assert config.page_size == 500
    assert config.max_arc_bytes == DEFAULT_MAX_ARC_BYTES
    assert config.oai_template == "http://127.0.0.1:8080/oai/{tape_uuid}"
    assert config.openurl_template == "http://127.0.0.1:8080/openurl/{arc_uuid}"
    assert config.strict_openurl is False


def test_layers_override_in_order(tmp_path):
    config_file = tmp_path / "repo.env"
    config_file.write_text("# repository\nPAGE_SIZE=50\nPORT=9000\nHOST=repo.example\nSTRICT_OPENURL=yes\n",
                           encoding="utf-8")
    config = Config.load(config_file, overrides={"port": 9100, "host": None}, environ={"XMLTAPE_PAGE_SIZE": "7"})
    assert config.page_size == 7
    assert config.port == 9100
    assert config.host == "repo.example"
    assert config.strict_openurl is True
    assert config.oai_template == "http://repo.example:9100/oai/{tape_uuid}"


def test_ingest_and_oai_settings_follow_the_configuration(tmp_path):
    config = Config(store_root=str(tmp_path), host="h", port=1, max_arc_bytes=1000, page_size=3)
    ingest = config.to_ingest_config(provenance=(("batchDirectory", "/b"),))
    assert ingest.max_arc_bytes == 1000
    assert ingest.openurl_base_template == "http://h:1/openurl/{arc_uuid}"
    assert ingest.provenance == (("batchDirectory", "/b"),)
    settings = oai_settings(config)
    assert settings.page_size == 3
    assert settings.oai_base_template == "http://h:1/oai/{tape_uuid}"
    assert config.store.root == tmp_path


def test_every_problem_is_reported(tmp_path):
    config_file = tmp_path / "repo.env"
    config_file.write_text("PAGE_SIZE=many\nCOLOUR=blue\n", encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        Config.load(config_file, environ={"XMLTAPE_STRICT_OPENURL": "perhaps"})
    message = str(info.value)
    for key in ("PAGE_SIZE", "COLOUR", "STRICT_OPENURL"):
        assert key in message


def test_invalid_values_are_rejected():
    with pytest.raises(ConfigError):
        Config(page_size=0)
    with pytest.raises(ConfigError):
        Config(oai_base_template="http://h/oai/")
    with pytest.raises(ConfigError):
        Config.load(environ={"XMLTAPE_PORT": "-1"})


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        Config.load(tmp_path / "missing.env", environ={})
