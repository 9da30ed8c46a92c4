"""
Turns a batch of submitted objects into one sealed XMLtape, its ARC files,
all their indexes and the locator registrations.

Everything is written below `<store>/.staging/<batch>/` first. Only when every
file is sealed and indexed are they moved into place, ARC files before the
tape, so a visible tape never refers to something that is not there. Any
failure removes the staging directory and whatever was already moved.
"""

import shutil
import uuid
from pathlib import Path
from typing import List, Optional, Sequence

from tqdm import tqdm

from arc_tools.writer import ArcWriter, check_media_type, create_arc, record_size
from db.arc_index import build_arc_index, persist_arc_index
from db.tape_index import build_tape_indexes, persist_tape_indexes
from identifiers import NamespaceClass, mint, validate_content_identifier
from lib.datestamp import DateFormat, sample_clock
from lib.errors import IngestIOError, InvalidSubmissionError, RepositoryError
from lib.fsutil import file_digest, publish
from lib.logger import logger
from lib.store_path import StorePath, dt_index_path, id_index_path
from locator.identifier_locator import IdentifierLocator
from model.ingest_models import (
    DatastreamRef,
    IngestConfig,
    IngestedObject,
    IngestReport,
    SubmissionObject,
)
from model.locator_models import VersionEntry
from model.tape_models import TapeAdmin, TapeRecord, TapeRecordAdmin
from tape_tools.writer import create_tape

from .factory import WrapperFactory

SOFTWARE = "xmltape-repository 1.0.0"


class BatchIngestor:
    """
    Ingests batches into one store root.

    Args:
        store (StorePath): The store root.
        config (IngestConfig): Rollover size, URL templates, clock and provenance.
        locator (Optional[IdentifierLocator]): Receives one registration per object;
            defaults to the locator log of the store.
        progress (bool): Show tqdm progress bars.
    """

    def __init__(self, store: StorePath, config: IngestConfig, locator: Optional[IdentifierLocator] = None,
                 progress: bool = False):
        self.store = store
        self.config = config
        self.locator = locator or IdentifierLocator(store.locator_log, config.oai_base_template)
        self.progress = progress

    # --------------------------------------------------------------------------
    # Validation
    # --------------------------------------------------------------------------

    def validate(self, objects: Sequence[SubmissionObject]) -> None:
        """
        Check every object before anything is written.

        Raises:
            InvalidSubmissionError: Listing every offending object.
        """
        if not objects:
            raise InvalidSubmissionError(["batch is empty"])
        problems: List[str] = []
        for position, submission in enumerate(objects):
            label = f"object {position} ({submission.content_id!r})"
            try:
                validate_content_identifier(submission.content_id)
                WrapperFactory.check_metadata(submission.metadata)
                for number, datastream in enumerate(submission.datastreams):
                    check_media_type(datastream.media_type)
                    if datastream.path is not None and not datastream.path.is_file():
                        raise InvalidSubmissionError([f"datastream {number}: {datastream.path} is not a file"])
            except RepositoryError as exc:
                problems.append(f"{label}: {exc}")
        if problems:
            logger.error("Rejected batch of %d objects: %d problems", len(objects), len(problems))
            raise InvalidSubmissionError(problems)

    # --------------------------------------------------------------------------
    # Writing
    # --------------------------------------------------------------------------

    def _write_arcs(self, objects: Sequence[SubmissionObject], staging: Path):
        """
        Write every datastream, rolling over to a new ARC file when the current one would
        grow past `max_arc_bytes`. A datastream larger than that gets a file of its own.
        """
        writers: List[ArcWriter] = []
        refs: List[List[DatastreamRef]] = []
        current: Optional[ArcWriter] = None
        previous = None
        for submission in tqdm(objects, desc="datastreams", unit="obj", disable=not self.progress):
            object_refs = []
            for datastream in submission.datastreams:
                ds_id = mint(NamespaceClass.DATASTREAM)
                size = record_size(ds_id, datastream.media_type, datastream.size())
                previous = sample_clock(self.config.clock, previous)
                if current is None or (current.record_count >= 1
                                       and current.position + size > self.config.max_arc_bytes):
                    if current is not None:
                        current.seal()
                    arc_id = mint(NamespaceClass.ARC)
                    current = create_arc(arc_id, staging / f"{arc_id.uuid_str}.arc", created=previous)
                    writers.append(current)
                current.append_datastream(ds_id, datastream.media_type, datastream.read(), previous)
                object_refs.append(DatastreamRef(
                    ds_id=ds_id,
                    arc_id=current.arc_id,
                    media_type=datastream.media_type,
                    openurl=WrapperFactory.make_openurl(self.config.openurl_base(current.arc_id), ds_id),
                ))
            refs.append(object_refs)
        if current is not None:
            current.seal()
        return writers, refs

    def _provenance(self, objects: Sequence[SubmissionObject]):
        batch_bytes = sum(ds.size() for submission in objects for ds in submission.datastreams)
        provenance = [
            ("software", SOFTWARE),
            ("processingTime", DateFormat.format(self.config.clock())),
            ("batchSize", str(batch_bytes)),
            ("objectCount", str(len(objects))),
        ]
        provenance.extend(self.config.provenance)
        return provenance

    def ingest_batch(self, objects: Sequence[SubmissionObject]) -> IngestReport:
        """
        Ingest one batch, all or nothing.

        Returns:
            IngestReport: Tape, ARC files, the identifiers given to every object and the index files.

        Raises:
            InvalidSubmissionError: If any object is invalid; nothing is written.
            IngestIOError: If writing failed; nothing became visible.
        """
        self.validate(objects)
        self.store.ensure()
        staging = self.store.staging / f"batch-{uuid.uuid4()}"
        staging.mkdir(parents=True)
        published: List[Path] = []
        try:
            # 1. ARC files
            writers, refs = self._write_arcs(objects, staging)
            arc_ids = [writer.arc_id for writer in writers]

            # 2. Tape, one wrapper per object
            tape_id = mint(NamespaceClass.TAPE)
            tape_path = staging / f"{tape_id.uuid_str}.xml"
            tape = create_tape(
                TapeAdmin(tape_id=tape_id, arc_ids=arc_ids, provenance=self._provenance(objects)),
                tape_path,
                digest_payloads=self.config.digest_payloads,
            )
            ingested: List[IngestedObject] = []
            previous = None
            for submission, object_refs in tqdm(list(zip(objects, refs)), desc="wrappers", unit="obj",
                                                disable=not self.progress):
                created = sample_clock(self.config.clock, previous)
                previous = created
                package_id = mint(NamespaceClass.PACKAGE)
                wrapper = WrapperFactory.make_wrapper(submission, object_refs, package_id, created)
                tape.append_record(TapeRecord(
                    admin=TapeRecordAdmin(record_id=str(package_id), created=created),
                    payload=wrapper,
                ))
                ingested.append(IngestedObject(
                    content_id=submission.content_id,
                    package_id=package_id,
                    created=created,
                    ds_ids=[ref.ds_id for ref in object_refs],
                ))
            tape.seal()

            # 3. Indexes from the write-time logs
            staged_arcs = []
            for writer in writers:
                arc_path = staging / writer.file_name
                index_path = persist_arc_index(arc_path, build_arc_index(writer.records), file_digest(arc_path))
                staged_arcs.append((arc_path, index_path))
            id_index, dt_index = build_tape_indexes(tape.records)
            tape_indexes = persist_tape_indexes(tape_path, id_index, dt_index, file_digest(tape_path))

            # 4. Publish: ARC files with their indexes, tape indexes, tape
            arc_paths, index_paths = [], []
            for arc_path, index_path in staged_arcs:
                final_arc = self.store.arc_path(arc_path.stem)
                for src, dst in ((arc_path, final_arc), (index_path, id_index_path(final_arc))):
                    publish(src, dst)
                    published.append(dst)
                arc_paths.append(final_arc)
                index_paths.append(id_index_path(final_arc))
            final_tape = self.store.tape_path(tape_id.uuid_str)
            for src, dst in ((tape_indexes[0], id_index_path(final_tape)),
                             (tape_indexes[1], dt_index_path(final_tape)),
                             (tape_path, final_tape)):
                publish(src, dst)
                published.append(dst)
            index_paths.extend([id_index_path(final_tape), dt_index_path(final_tape)])

            # 5. Locator
            self.locator.register_many(
                VersionEntry(content_id=obj.content_id, package_id=obj.package_id, tape_id=tape_id,
                             created=obj.created)
                for obj in ingested
            )
        except BaseException as exc:
            for path in reversed(published):
                path.unlink(missing_ok=True)
            shutil.rmtree(staging, ignore_errors=True)
            if isinstance(exc, OSError) and not isinstance(exc, IngestIOError):
                logger.error("Batch failed, nothing was published: %s", exc)
                raise IngestIOError(f"Writing the batch failed: {exc}") from exc
            raise
        shutil.rmtree(staging, ignore_errors=True)
        logger.info("Committed tape %s: %d objects, %d ARC files", tape_id, len(ingested), len(arc_ids))
        return IngestReport(
            tape_id=tape_id,
            arc_ids=arc_ids,
            objects=ingested,
            tape_path=final_tape,
            arc_paths=arc_paths,
            index_paths=index_paths,
        )


def ingest_batch(objects: Sequence[SubmissionObject], config: IngestConfig, store: StorePath,
                 locator: Optional[IdentifierLocator] = None) -> IngestReport:
    return BatchIngestor(store, config, locator).ingest_batch(objects)
