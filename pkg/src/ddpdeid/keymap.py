"""Mapping extracted values to replacement codes.

Usernames and names get a stable code derived from a keyed hash, so the
same value always maps to the same code within one salt, and no key file
is needed to reproduce the mapping.  Emails, phone numbers and URLs get
a fixed per-category code.  Study participants listed in a participant
file get their researcher-chosen participant id instead of a hash.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import secrets
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import FatalInputError, InvariantError, KeyCollisionError
from .extract import Category, PiiMatch, Rule, is_username_like

log = logging.getLogger(__name__)

FIXED_CODES = {
    Category.EMAIL: "__emailaddress",
    Category.PHONE: "__phonenumber",
    Category.URL: "__url",
}

# Hash input namespaces. DdpId shares the username namespace on purpose:
# a package id is a username, and both spellings must agree on one code.
_HASH_CLASS = {
    Category.USERNAME: "username",
    Category.DDP_ID: "username",
    Category.NAME: "name",
}

PARTICIPANT_HEADER = ["username", "name", "participant_id"]


@dataclass(frozen=True)
class Participant:
    username: str
    name: str
    participant_id: str


def load_participant_file(path: Path) -> list[Participant]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FatalInputError(f"cannot read participant file {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != PARTICIPANT_HEADER:
        raise FatalInputError(
            f"participant file {path} must start with header "
            f"{','.join(PARTICIPANT_HEADER)!r}"
        )
    participants = []
    seen_usernames: dict[str, str] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise FatalInputError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
        username, name, pid = (c.strip() for c in row)
        if not is_username_like(username):
            raise FatalInputError(f"{path}:{lineno}: invalid username {username!r}")
        if not pid:
            raise FatalInputError(f"{path}:{lineno}: empty participant id")
        prev = seen_usernames.get(username.lower())
        if prev is not None and prev != pid:
            raise FatalInputError(
                f"{path}:{lineno}: username {username!r} listed with two ids"
            )
        seen_usernames[username.lower()] = pid
        participants.append(Participant(username, name, pid))
    return participants


def canonical_value(category: Category, value: str) -> str:
    """Usernames and names compare case-insensitively; the rest verbatim."""
    if category in _HASH_CLASS:
        return value.lower()
    return value


class PiiKeyMap:
    """The value-to-code table built during a run.

    Entries are keyed by (category, canonical value).  A username that
    turns out to be a package owner is upgraded from Username to DdpId;
    the code does not change.
    """

    def __init__(self, salt: bytes | None = None, participants: Iterable[Participant] = ()):
        self.salt = secrets.token_bytes(16) if salt is None else salt
        self._entries: dict[tuple[Category, str], str] = {}
        # canonical value -> participant id, for usernames and names
        self._participant_codes: dict[str, str] = {}
        # participant ids themselves, never to be treated as PII
        self._participant_ids: set[str] = set()
        # hashed code -> (hash class, canonical), for collision detection
        self._owners: dict[str, tuple[str, str]] = {}
        # canonicals of names known exactly (profile display names and
        # participant names); these bypass the capital-letter filter
        self.exact_names: set[str] = set()

        for p in participants:
            self._participant_codes[p.username.lower()] = p.participant_id
            self._participant_ids.add(p.participant_id.lower())
            if p.name:
                self._participant_codes[p.name.lower()] = p.participant_id
                self.exact_names.add(p.name.lower())

    def is_participant_id(self, value: str) -> bool:
        return value.lower() in self._participant_ids

    def assign_code(self, m: PiiMatch) -> str:
        category = m.category
        if category in FIXED_CODES:
            code = FIXED_CODES[category]
            self._entries.setdefault((category, m.value), code)
            return code

        canon = canonical_value(category, m.value)
        code = self._participant_codes.get(canon)
        if code is None:
            if m.rule is Rule.PROFILE and category is Category.NAME and m.alias_of:
                hash_class, hash_input = "username", m.alias_of.lower()
                code = self._participant_codes.get(hash_input)
            else:
                hash_class, hash_input = _HASH_CLASS[category], canon
            if code is None:
                code = self._hash(hash_class, hash_input)
                owner = self._owners.setdefault(code, (hash_class, hash_input))
                if owner != (hash_class, hash_input):
                    raise KeyCollisionError(code, "/".join(owner), f"{hash_class}/{hash_input}")

        if m.rule is Rule.PROFILE and category is Category.NAME:
            self.exact_names.add(canon)

        if category is Category.USERNAME and (Category.DDP_ID, canon) in self._entries:
            return self._entries[(Category.DDP_ID, canon)]
        if category is Category.DDP_ID:
            self._entries.pop((Category.USERNAME, canon), None)
        self._entries[(category, canon)] = code
        return code

    def _hash(self, hash_class: str, canon: str) -> str:
        digest = hashlib.blake2b(
            (hash_class + "\0" + canon).encode("utf-8"), key=self.salt, digest_size=8
        )
        return "__" + digest.hexdigest()

    def lookup(self, category: Category, value: str) -> str | None:
        canon = canonical_value(category, value)
        code = self._entries.get((category, canon))
        if code is None and category is Category.USERNAME:
            code = self._entries.get((Category.DDP_ID, canon))
        if code is None and category is Category.DDP_ID:
            code = self._entries.get((Category.USERNAME, canon))
        return code

    def items(self) -> Iterator[tuple[Category, str, str]]:
        for (category, canon), code in self._entries.items():
            yield category, canon, code

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PiiKeyMap):
            return NotImplemented
        return self._entries == other._entries

    __hash__ = None  # type: ignore[assignment]


def build_keymap(
    matches: Iterable[PiiMatch],
    participants: Iterable[Participant] = (),
    salt: bytes | None = None,
) -> PiiKeyMap:
    """Build the full table for a run.

    Participants are entered up front so they are replaced even when no
    extraction rule fires on them.  Values that already are replacement
    codes or participant ids are skipped, which keeps a second pass over
    de-identified output from inventing new entries.
    """
    km = PiiKeyMap(salt=salt, participants=participants)
    for p in participants:
        km.assign_code(PiiMatch(p.username, Category.USERNAME, "participants", Rule.PARTICIPANT))
        if p.name:
            km.assign_code(PiiMatch(p.name, Category.NAME, "participants", Rule.PARTICIPANT))
    for m in matches:
        if km.is_participant_id(m.value):
            continue
        km.assign_code(m)
    return km


def save_keys(km: PiiKeyMap, path: Path, include_salt: bool = False) -> None:
    rows = sorted((c.value, original, code) for c, original, code in km.items())
    lines = []
    if include_salt:
        lines.append(f"# salt={km.salt.hex()}")
    lines.append("category\toriginal\tcode")
    for category, original, code in rows:
        if "\t" in original or "\n" in original:
            raise InvariantError(f"key value not representable in key file: {original!r}")
        lines.append(f"{category}\t{original}\t{code}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_keys(path: Path) -> PiiKeyMap:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FatalInputError(f"cannot read key file {path}: {exc}") from exc
    lines = text.splitlines()
    salt = b""
    if lines and lines[0].startswith("# salt="):
        try:
            salt = bytes.fromhex(lines[0].split("=", 1)[1])
        except ValueError as exc:
            raise FatalInputError(f"{path}: bad salt line") from exc
        lines = lines[1:]
    if not lines or lines[0].split("\t") != ["category", "original", "code"]:
        raise FatalInputError(f"{path}: missing 'category\\toriginal\\tcode' header")
    km = PiiKeyMap(salt=salt)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FatalInputError(f"{path}:{lineno}: expected 3 tab-separated fields")
        category_text, original, code = parts
        try:
            category = Category(category_text)
        except ValueError as exc:
            raise FatalInputError(f"{path}:{lineno}: unknown category {category_text!r}") from exc
        key = (category, original)
        if key in km._entries:
            raise FatalInputError(f"{path}:{lineno}: duplicate entry for {category}/{original!r}")
        km._entries[key] = code
    return km
