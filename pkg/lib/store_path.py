"""
Layout of a store root on disk.

    <root>/tapes/<uuid>.xml          sealed XMLtapes
    <root>/tapes/<uuid>.xml.idx.id   identifier index
    <root>/tapes/<uuid>.xml.idx.dt   datetime index
    <root>/arcs/<uuid>.arc           sealed ARC files
    <root>/arcs/<uuid>.arc.idx.id    datastream index
    <root>/locator.log               Identifier Locator log
    <root>/.staging/<batch>/         temporaries of batches in flight
"""

import os
from pathlib import Path
from typing import List, Union

TAPE_SUFFIX = ".xml"
ARC_SUFFIX = ".arc"
ID_INDEX_SUFFIX = ".idx.id"
DT_INDEX_SUFFIX = ".idx.dt"


def id_index_path(target: Union[str, Path]) -> Path:
    target = Path(target)
    return target.with_name(target.name + ID_INDEX_SUFFIX)


def dt_index_path(target: Union[str, Path]) -> Path:
    target = Path(target)
    return target.with_name(target.name + DT_INDEX_SUFFIX)


class StorePath:
    """
    Resolves the well-known locations below a store root.
    """

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    @property
    def tapes(self) -> Path:
        return self.root / "tapes"

    @property
    def arcs(self) -> Path:
        return self.root / "arcs"

    @property
    def staging(self) -> Path:
        return self.root / ".staging"

    @property
    def locator_log(self) -> Path:
        return self.root / "locator.log"

    def ensure(self) -> "StorePath":
        """
        Create the store directories if they do not exist yet.
        """
        for directory in (self.tapes, self.arcs, self.staging):
            directory.mkdir(parents=True, exist_ok=True)
        return self

    def tape_path(self, tape_uuid: str) -> Path:
        return self.tapes / f"{tape_uuid}{TAPE_SUFFIX}"

    def arc_path(self, arc_uuid: str) -> Path:
        return self.arcs / f"{arc_uuid}{ARC_SUFFIX}"

    def sealed_tapes(self) -> List[Path]:
        if not self.tapes.is_dir():
            return []
        return sorted(p for p in self.tapes.iterdir() if p.is_file() and p.name.endswith(TAPE_SUFFIX)
                      and not p.name.startswith("."))

    def sealed_arcs(self) -> List[Path]:
        if not self.arcs.is_dir():
            return []
        return sorted(p for p in self.arcs.iterdir() if p.is_file() and p.name.endswith(ARC_SUFFIX)
                      and not p.name.startswith("."))

    def visible_files(self) -> List[Path]:
        """
        Every file outside the staging area.
        """
        staging = os.path.abspath(self.staging)
        result = []
        for root, dirs, files in os.walk(self.root):
            if os.path.abspath(root).startswith(staging):
                continue
            result.extend(Path(root) / f for f in files)
        return sorted(result)
