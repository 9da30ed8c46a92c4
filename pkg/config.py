"""
Configuration module for the repository.

Settings come from four layers, later ones winning:

    defaults < configuration file < command-line flags < environment

The configuration file is line-oriented `KEY=VALUE` with `#` comments, read
with `dotenv`; keys are the upper-cased field names (`PAGE_SIZE=500`).
Environment variables use the same keys prefixed with `XMLTAPE_`
(`XMLTAPE_PORT=9090`); a `.env` file in the working directory counts as
environment.
"""

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import dotenv

from lib.datestamp import Clock, utc_now
from lib.errors import ConfigError
from lib.store_path import StorePath
from model.ingest_models import ARC_PLACEHOLDER, DEFAULT_MAX_ARC_BYTES, TAPE_PLACEHOLDER, IngestConfig

ENV_PREFIX = "XMLTAPE_"

_INT_FIELDS = ("port", "page_size", "max_arc_bytes")
_BOOL_FIELDS = ("strict_openurl",)
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class Config:
    """
    Configuration of one store root and the service exposing it.

    Templates may use `{host}` and `{port}`; they are substituted when the
    configuration is loaded or accessed.
    """

    store_root: str = "store"
    host: str = "127.0.0.1"
    port: int = 8080
    page_size: int = 500
    max_arc_bytes: int = DEFAULT_MAX_ARC_BYTES
    openurl_base_template: str = "http://{host}:{port}/openurl/" + ARC_PLACEHOLDER
    oai_base_template: str = "http://{host}:{port}/oai/" + TAPE_PLACEHOLDER
    metadata_prefix: str = "didl"
    metadata_namespace: str = "urn:xmltape:wrapper:1.0"
    metadata_schema: str = "urn:xmltape:wrapper:1.0"
    repository_name: str = "XMLtape repository"
    admin_email: str = "admin@localhost"
    strict_openurl: bool = False
    log_level: str = "INFO"

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError("Invalid configuration: " + "; ".join(problems))

    def problems(self) -> List[str]:
        problems = []
        for name in _INT_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                problems.append(f"{name.upper()} must be a positive integer")
        for name, placeholder in (("openurl_base_template", ARC_PLACEHOLDER),
                                  ("oai_base_template", TAPE_PLACEHOLDER)):
            if self._substitute(getattr(self, name)).count(placeholder) != 1:
                problems.append(f"{name.upper()} must contain {placeholder} exactly once")
        if not self.metadata_prefix:
            problems.append("METADATA_PREFIX must not be empty")
        return problems

    # --------------------------------------------------------------------------
    # Derived settings
    # --------------------------------------------------------------------------

    def _substitute(self, template: str) -> str:
        return template.replace("{host}", self.host).replace("{port}", str(self.port))

    @property
    def openurl_template(self) -> str:
        return self._substitute(self.openurl_base_template)

    @property
    def oai_template(self) -> str:
        return self._substitute(self.oai_base_template)

    @property
    def store(self) -> StorePath:
        return StorePath(self.store_root)

    def to_ingest_config(self, clock: Clock = utc_now, provenance: Tuple[Tuple[str, str], ...] = ()) -> IngestConfig:
        return IngestConfig(
            max_arc_bytes=self.max_arc_bytes,
            openurl_base_template=self.openurl_template,
            oai_base_template=self.oai_template,
            clock=clock,
            provenance=tuple(provenance),
        )

    # --------------------------------------------------------------------------
    # Loading
    # --------------------------------------------------------------------------

    @staticmethod
    def load(config_file: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None,
             environ: Optional[Mapping[str, str]] = None) -> "Config":
        """
        Load the configuration from all layers.

        Args:
            config_file: Optional `KEY=VALUE` file.
            overrides: Field values from command-line flags; None values are ignored.
            environ: Environment to read `XMLTAPE_*` variables from; defaults to
                `os.environ` after loading `.env`.

        Raises:
            ConfigError: Listing every key that is unknown or has an unusable value.
        """
        names = {f.name for f in fields(Config)}
        raw: Dict[str, Any] = {}
        problems: List[str] = []

        if config_file is not None:
            path = Path(config_file)
            if not path.is_file():
                raise ConfigError(f"Configuration file {path} does not exist")
            for key, value in dotenv.dotenv_values(path).items():
                if key.lower() not in names:
                    problems.append(f"unknown key {key} in {path.name}")
                elif value is None:
                    problems.append(f"{key} has no value in {path.name}")
                else:
                    raw[key.lower()] = value

        for name, value in (overrides or {}).items():
            if value is not None:
                raw[name] = value

        if environ is None:
            dotenv.load_dotenv()
            environ = os.environ
        for name in names:
            value = environ.get(ENV_PREFIX + name.upper())
            if value is not None:
                raw[name] = value

        values: Dict[str, Any] = {}
        for name, value in raw.items():
            try:
                values[name] = _coerce(name, value)
            except ValueError as exc:
                problems.append(f"{name.upper()}: {exc}")
        if problems:
            raise ConfigError("Invalid configuration: " + "; ".join(problems))

        return Config(**values)


def _coerce(name: str, value: Any) -> Any:
    if name in _INT_FIELDS:
        if isinstance(value, bool):
            raise ValueError(f"expected an integer, got {value!r}")
        if isinstance(value, int):
            return value
        text = str(value).strip()
        if not text.isdigit():
            raise ValueError(f"expected an integer, got {value!r}")
        return int(text)
    if name in _BOOL_FIELDS:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in _TRUE:
            return True
        if text in _FALSE:
            return False
        raise ValueError(f"expected a boolean, got {value!r}")
    return str(value)
