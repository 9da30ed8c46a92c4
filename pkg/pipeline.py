"""
Operator command line of the repository.

    pipeline.py [global flags] ingest <batch-dir>
    pipeline.py [global flags] validate <file> [<file> ...]
    pipeline.py [global flags] reindex [<file> ...]
    pipeline.py [global flags] serve
    pipeline.py [global flags] get-record <tape> <package-id>
    pipeline.py [global flags] get-datastream <arc> <datastream-id>
    pipeline.py [global flags] locate <content-id>

Reports are line-oriented on standard output, diagnostics go to standard
error. Exit codes: 0 success, 1 validation or lookup failure, 2 usage error,
3 I/O error.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from arc_tools.reader import read_record, validate_arc
from config import Config
from db.arc_index import build_arc_index, load_arc_index, persist_arc_index
from db.index_file import compare_with_index
from db.tape_index import build_tape_indexes, load_tape_indexes, persist_tape_indexes
from identifiers import NamespaceClass, from_uuid, parse_as
from ingest_tools.batch_loader import load_batch
from ingest_tools.ingestor import BatchIngestor
from lib.errors import (
    ConfigError,
    IngestIOError,
    InvalidClassError,
    KeyNotFoundError,
    MalformedIdentifierError,
    RepositoryError,
)
from lib.fsutil import file_digest
from lib.logger import logger, set_log_level
from lib.store_path import id_index_path
from locator.identifier_locator import IdentifierLocator
from tape_tools.reader import read_record_at
from tape_tools.validator import validate_tape

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3

ARC_MAGIC = b"filedesc://"


# ------------------------------------------------------------------------------
# Helper Functions
# ------------------------------------------------------------------------------

def is_arc_file(path: Path) -> bool:
    """
    ARC files start with their version block, whose URL uses the `filedesc` scheme.
    """
    with open(path, "rb") as fd:
        return fd.read(len(ARC_MAGIC)) == ARC_MAGIC


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_USAGE
    if isinstance(exc, (MalformedIdentifierError, InvalidClassError)):
        return EXIT_USAGE
    if isinstance(exc, IngestIOError):
        return EXIT_IO
    if isinstance(exc, RepositoryError):
        return EXIT_FAILURE
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_FAILURE


def write_bytes(data: bytes) -> None:
    stream = getattr(sys.stdout, "buffer", None)
    if stream is None:
        sys.stdout.write(data.decode("utf-8", "replace"))
        return
    stream.write(data)
    stream.flush()


def _tape_file(config: Config, tape: str) -> Path:
    path = config.store.tape_path(from_uuid(NamespaceClass.TAPE, tape).uuid_str)
    if not path.is_file():
        raise KeyNotFoundError(f"No sealed tape {tape} in {config.store.root}")
    return path


def _arc_file(config: Config, arc: str) -> Path:
    path = config.store.arc_path(from_uuid(NamespaceClass.ARC, arc).uuid_str)
    if not path.is_file():
        raise KeyNotFoundError(f"No sealed ARC file {arc} in {config.store.root}")
    return path


# ------------------------------------------------------------------------------
# Commands
# ------------------------------------------------------------------------------

def cmd_ingest(config: Config, args: argparse.Namespace) -> int:
    """
    Ingest one batch directory and print its manifest.
    """
    batch_dir = Path(args.batch_dir)
    objects = load_batch(batch_dir)
    if not objects:
        print(f"error: batch directory {batch_dir} holds no objects", file=sys.stderr)
        return EXIT_USAGE
    ingest_config = config.to_ingest_config(provenance=(("batchDirectory", str(batch_dir.resolve())),))
    ingestor = BatchIngestor(config.store, ingest_config, progress=args.progress)
    report = ingestor.ingest_batch(objects)
    sys.stdout.write(report.to_manifest())
    return EXIT_OK


def cmd_validate(config: Config, args: argparse.Namespace) -> int:
    """
    Validate tapes and ARC files; the kind of each file is sniffed from its first bytes.
    Files with an index are also checked against the digest and extents it recorded.
    """
    status = EXIT_OK
    for name in args.paths:
        path = Path(name)
        if is_arc_file(path):
            report = validate_arc(path, str(path))
            if report.ok:
                report.findings.extend(compare_with_index(id_index_path(path), path, build_arc_index(path).entries))
        else:
            report = validate_tape(path, str(path))
        for line in report.to_lines():
            print(line)
        if not report.ok:
            status = EXIT_FAILURE
    return status


def reindex_file(path: Path) -> List[Path]:
    """
    Rebuild the index files of one sealed tape or ARC file from a full scan.
    """
    digest = file_digest(path)
    if is_arc_file(path):
        return [persist_arc_index(path, build_arc_index(path), digest)]
    id_index, dt_index = build_tape_indexes(path)
    return list(persist_tape_indexes(path, id_index, dt_index, digest))


def cmd_reindex(config: Config, args: argparse.Namespace) -> int:
    """
    Rebuild indexes of the given files, or of every sealed file in the store.
    """
    paths = [Path(name) for name in args.paths]
    if not paths:
        paths = config.store.sealed_arcs() + config.store.sealed_tapes()
    for path in paths:
        for index_path in reindex_file(path):
            print(f"index\t{index_path}")
    return EXIT_OK


def cmd_serve(config: Config, args: argparse.Namespace) -> int:
    import uvicorn

    from access.app import create_app

    app = create_app(config)
    logger.info("Serving %s on %s:%d", config.store.root, config.host, config.port)
    uvicorn.run(app, host=config.host, port=config.port, log_level=config.log_level.lower())
    return EXIT_OK


def cmd_get_record(config: Config, args: argparse.Namespace) -> int:
    """
    Print the payload of one tape record, byte for byte. The index is hashed
    against the tape only with `--verify`; without it a stale extent still fails to parse.
    """
    tape_path = _tape_file(config, args.tape)
    package_id = str(parse_as(args.package_id, NamespaceClass.PACKAGE))
    id_index, _ = load_tape_indexes(tape_path, verify=args.verify)
    record = read_record_at(tape_path, id_index.lookup_id(package_id).extent)
    write_bytes(record.payload)
    return EXIT_OK


def cmd_get_datastream(config: Config, args: argparse.Namespace) -> int:
    """
    Print one datastream, byte for byte.
    """
    arc_path = _arc_file(config, args.arc)
    ds_id = str(parse_as(args.ds_id, NamespaceClass.DATASTREAM))
    index = load_arc_index(arc_path, verify=args.verify)
    _, data = read_record(arc_path, index.lookup_id(ds_id).extent)
    write_bytes(data)
    return EXIT_OK


def cmd_locate(config: Config, args: argparse.Namespace) -> int:
    """
    Print every version of an object: package id, OAI-PMH base URL, creation datetime.
    """
    locator = IdentifierLocator(config.store.locator_log, config.oai_template)
    versions = locator.resolve_versions(args.content_id)
    if not versions:
        print(f"error: no versions of {args.content_id}", file=sys.stderr)
        return EXIT_FAILURE
    for version in versions:
        print(version.to_line())
    return EXIT_OK


# ------------------------------------------------------------------------------
# Argument Parsing
# ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pipeline.py",
        description="Write-once XMLtape/ARC repository: ingest, validate, reindex and serve",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Ingest a batch directory
  python pipeline.py --store ./store ingest ./batch

  # Serve every sealed tape and ARC file of a store
  python pipeline.py --store ./store --port 8080 serve

  # Fetch a record without going through HTTP
  python pipeline.py --store ./store get-record <tape-uuid> info:lanl-repo/pkg/<uuid>
        """,
    )
    parser.add_argument("--store", help="Store root directory")
    parser.add_argument("--config", help="Configuration file (KEY=VALUE lines)")
    parser.add_argument("--max-arc-bytes", type=int, help="Roll over to a new ARC file beyond this size")
    parser.add_argument("--page-size", type=int, help="Records per OAI-PMH list response")
    parser.add_argument("--host", help="Interface to serve on")
    parser.add_argument("--port", type=int, help="Port to serve on")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")

    commands = parser.add_subparsers(dest="command", required=True)

    ingest = commands.add_parser("ingest", help="Ingest a batch directory")
    ingest.add_argument("batch_dir")
    ingest.add_argument("--progress", action="store_true", help="Show progress bars")
    ingest.set_defaults(handler=cmd_ingest)

    validate = commands.add_parser("validate", help="Validate tapes and ARC files")
    validate.add_argument("paths", nargs="+")
    validate.set_defaults(handler=cmd_validate)

    reindex = commands.add_parser("reindex", help="Rebuild index files from full scans")
    reindex.add_argument("paths", nargs="*")
    reindex.set_defaults(handler=cmd_reindex)

    serve = commands.add_parser("serve", help="Run the OAI-PMH, OpenURL and locator service")
    serve.set_defaults(handler=cmd_serve)

    get_record = commands.add_parser("get-record", help="Print a record payload")
    get_record.add_argument("tape", help="Tape UUID or identifier")
    get_record.add_argument("package_id")
    get_record.add_argument("--verify", action="store_true", help="Check the index digest against the whole tape first")
    get_record.set_defaults(handler=cmd_get_record)

    get_datastream = commands.add_parser("get-datastream", help="Print a datastream")
    get_datastream.add_argument("arc", help="ARC file UUID or identifier")
    get_datastream.add_argument("ds_id")
    get_datastream.add_argument("--verify", action="store_true", help="Check the index digest against the whole ARC file first")
    get_datastream.set_defaults(handler=cmd_get_datastream)

    locate = commands.add_parser("locate", help="List every version of an object")
    locate.add_argument("content_id")
    locate.set_defaults(handler=cmd_locate)
    return parser


# ------------------------------------------------------------------------------
# Main Execution
# ------------------------------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        config = Config.load(args.config, overrides={
            "store_root": args.store,
            "max_arc_bytes": args.max_arc_bytes,
            "page_size": args.page_size,
            "host": args.host,
            "port": args.port,
            "log_level": args.log_level,
        })
        set_log_level(config.log_level)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.handler(config, args)
    except (RepositoryError, OSError) as exc:
        code = exit_code(exc)
        logger.error("%s failed: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


# ------------------------------------------------------------------------------
# Entry Point
# ------------------------------------------------------------------------------

if __name__ == "__main__":
    sys.exit(main())
