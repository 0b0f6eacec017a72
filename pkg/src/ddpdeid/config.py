"""Loading of the small line-based config lists and their bundled defaults."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .errors import FatalInputError


def read_list_file(path: Path) -> list[str]:
    """One entry per line; blank lines and '#' comments are ignored."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FatalInputError(f"cannot read list file {path}: {exc}") from exc
    entries = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return entries


def _bundled(name: str) -> list[str]:
    text = resources.files("ddpdeid.data").joinpath(name).read_text(encoding="utf-8")
    return [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]


def default_discard_list() -> list[str]:
    return _bundled("discard_list.txt")


def default_sender_labels() -> set[str]:
    return set(_bundled("sender_labels.txt"))


def default_exempt_labels() -> set[str]:
    return set(_bundled("exempt_labels.txt"))


def default_name_list_lines() -> list[str]:
    return _bundled("names_nl.txt")
