"""Unpacking data download packages into a working tree.

A package arrives as a zip archive or an already-unpacked folder; large
accounts are split into several archives named like name_part1.zip,
which are merged back into one package.  Inputs are never modified;
everything is copied or extracted into a working directory first.

Every file is classified by extension.  Anything that is not JSON, JPEG
or MP4 is discarded, as are files on the discard list: those hold
browser-injected records (saved form values, login history) that exist
only in some exports and carry no content worth keeping.
"""

from __future__ import annotations

import logging
import re
import shutil
import zipfile
from dataclasses import dataclass
from enum import Enum
from pathlib import Path, PurePosixPath

from .errors import FatalInputError

log = logging.getLogger(__name__)

_PART_SUFFIX_RE = re.compile(r"[_\-]part\d+$", re.IGNORECASE)


class EntryKind(Enum):
    STRUCTURED_TEXT = "structured_text"
    IMAGE = "image"
    VIDEO = "video"
    DISCARD = "discard"


_KIND_BY_EXTENSION = {
    ".json": EntryKind.STRUCTURED_TEXT,
    ".jpg": EntryKind.IMAGE,
    ".jpeg": EntryKind.IMAGE,
    ".mp4": EntryKind.VIDEO,
}


def classify(name: str) -> EntryKind:
    return _KIND_BY_EXTENSION.get(PurePosixPath(name).suffix.lower(), EntryKind.DISCARD)


@dataclass(frozen=True)
class PackageEntry:
    rel_path: str  # forward-slash path inside the package
    kind: EntryKind

    @property
    def basename(self) -> str:
        return PurePosixPath(self.rel_path).name


@dataclass
class Package:
    ddp_id: str
    root: Path
    entries: list[PackageEntry]

    def abs_path(self, entry: PackageEntry) -> Path:
        return self.root / entry.rel_path

    def structured(self) -> list[PackageEntry]:
        return [e for e in self.entries if e.kind is EntryKind.STRUCTURED_TEXT]

    def media(self) -> list[PackageEntry]:
        return [e for e in self.entries if e.kind in (EntryKind.IMAGE, EntryKind.VIDEO)]


def ddp_id_for(archive: Path) -> str:
    """Package id from an archive or folder name, part suffix stripped."""
    stem = archive.stem if archive.suffix.lower() == ".zip" else archive.name
    return _PART_SUFFIX_RE.sub("", stem)


def group_inputs(inputs: list[Path]) -> dict[str, list[Path]]:
    """Group input paths that belong to one package (multi-part zips)."""
    groups: dict[str, list[Path]] = {}
    for path in inputs:
        groups.setdefault(ddp_id_for(path), []).append(path)
    return groups


def unpack_ddp(inputs: list[Path] | Path, workdir: Path) -> Package:
    """Extract one package (possibly several part archives) into workdir.

    Archive members that would escape the target directory are skipped
    with a warning.  A file appearing in two parts is a hard error;
    guessing which copy wins would silently drop data.
    """
    if isinstance(inputs, Path):
        inputs = [inputs]
    if not inputs:
        raise FatalInputError("no input paths given")
    ids = {ddp_id_for(p) for p in inputs}
    if len(ids) != 1:
        raise FatalInputError(f"inputs belong to different packages: {sorted(ids)}")
    ddp_id = ids.pop()

    target = Path(workdir) / ddp_id
    target.mkdir(parents=True, exist_ok=True)
    for path in sorted(inputs):
        if not path.exists():
            raise FatalInputError(f"input {path} does not exist")
        if path.is_dir():
            _copy_tree(path, target)
        elif path.suffix.lower() == ".zip":
            _extract_zip(path, target)
        else:
            raise FatalInputError(f"input {path} is neither a folder nor a zip archive")

    entries = []
    for file in sorted(p for p in target.rglob("*") if p.is_file()):
        rel = file.relative_to(target).as_posix()
        kind = classify(rel)
        if kind is EntryKind.DISCARD:
            log.info("discard: %s/%s (unsupported file type)", ddp_id, rel)
        entries.append(PackageEntry(rel, kind))
    return Package(ddp_id=ddp_id, root=target, entries=entries)


def _copy_tree(source: Path, target: Path) -> None:
    for file in sorted(p for p in source.rglob("*") if p.is_file()):
        rel = file.relative_to(source)
        dest = target / rel
        if dest.exists():
            raise FatalInputError(f"{rel.as_posix()} appears in more than one input part")
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(file, dest)


def _extract_zip(archive: Path, target: Path) -> None:
    try:
        zf = zipfile.ZipFile(archive)
    except zipfile.BadZipFile as exc:
        raise FatalInputError(f"{archive} is not a readable zip archive: {exc}") from exc
    resolved_target = target.resolve()
    with zf:
        for info in zf.infolist():
            if info.is_dir():
                continue
            dest = (target / info.filename).resolve()
            if not dest.is_relative_to(resolved_target):
                log.warning("%s: skipping member escaping the archive: %s", archive, info.filename)
                continue
            if dest.exists():
                raise FatalInputError(
                    f"{info.filename} appears in more than one input part"
                )
            dest.parent.mkdir(parents=True, exist_ok=True)
            with zf.open(info) as src, open(dest, "wb") as out:
                shutil.copyfileobj(src, out)


def filter_entries(pkg: Package, discard_list: list[str]) -> Package:
    """Drop files whose basename is on the discard list, deleting them
    from the working tree."""
    names = set(discard_list)
    kept = []
    for entry in pkg.entries:
        if entry.basename in names:
            log.info("discard: %s/%s (discard list)", pkg.ddp_id, entry.rel_path)
            pkg.abs_path(entry).unlink(missing_ok=True)
        else:
            kept.append(entry)
    return Package(ddp_id=pkg.ddp_id, root=pkg.root, entries=kept)
